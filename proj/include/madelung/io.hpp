/**
 * @file io.hpp
 * @brief CSV profile and state-table formats, config files and plot scripts.
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madelung/limits.hpp"
#include "madelung/observables.hpp"
#include "madelung/solver.hpp"
#include "madelung/sweep.hpp"

namespace madelung {

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// Full-string parse; throws InvalidArgument on trailing garbage.
[[nodiscard]] double parse_double(std::string_view text);

inline constexpr std::string_view profile_header = "r,U,dU,Y,rho,omega";
inline constexpr std::string_view state_table_header = "T,X,Z,Ubar,Kbar,H,F,Ybar,r_m,L_s,status";

struct ProfileRow {
  double r = 0;
  double U = 0;
  double dU = 0;
  double Y = 0;
  double rho = 0;
  double omega = 0;
};

/// One row per grid node, starting at r_eps.
[[nodiscard]] std::vector<ProfileRow> profile_rows(const RadialSolution& solution, const PartitionFunction& Z);

void write_profile_csv(std::ostream& out, std::span<const ProfileRow> rows);
void write_profile_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows);
[[nodiscard]] std::vector<ProfileRow> read_profile_csv(std::istream& in);
[[nodiscard]] std::vector<ProfileRow> read_profile_csv(const std::filesystem::path& path);

void write_state_table_csv(std::ostream& out, const StateTable& table);
void write_state_table_csv(const std::filesystem::path& path, const StateTable& table);
/// Fields absent from the CSV are rebuilt: Ebar = Ubar + Kbar, log_Z = ln Z.
[[nodiscard]] StateTable read_state_table_csv(std::istream& in);
[[nodiscard]] StateTable read_state_table_csv(const std::filesystem::path& path);

/// `key = value` lines; '#' starts a comment. Duplicate keys are rejected.
[[nodiscard]] std::map<std::string, std::string> read_config(std::istream& in);
[[nodiscard]] std::map<std::string, std::string> read_config(const std::filesystem::path& path);

/// Relative paths resolve against MADELUNG_OUTPUT_DIR when it is set.
[[nodiscard]] std::filesystem::path resolve_output(const std::filesystem::path& path);

struct ProfileSeries {
  double T = 0;
  double X = 0;
  std::vector<ProfileRow> rows;
};

struct PlotData {
  const StateTable* table = nullptr;
  std::vector<ProfileSeries> profiles;
  /// Overlay for fig1.
  GroundState ground;
};

/// Throws UnknownFigureTag unless tag is one of fig1, fig2, fig3, fig5, fig7.
void check_figure_tag(std::string_view tag);

/// Gnuplot script with the data embedded as inline blocks. InsufficientData
/// when the input cannot populate the figure.
[[nodiscard]] std::string plot_script(std::string_view tag, const PlotData& data);

void emit_plot_script(std::string_view tag, const PlotData& data, const std::filesystem::path& path);

}  // namespace madelung
