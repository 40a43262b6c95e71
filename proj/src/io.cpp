#include "madelung/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "madelung/error.hpp"

namespace madelung {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for reading");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw Error(ErrorCode::Io, "expected CSV header '" + std::string(header) + "'");
  }
}

std::string quoted(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') out += "''";
    else out += ch;
  }
  return out + "'";
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw Error(ErrorCode::InvalidArgument, "not a number: '" + t + "'");
  }
  return v;
}

std::vector<ProfileRow> profile_rows(const RadialSolution& s, const PartitionFunction& Z) {
  std::vector<ProfileRow> rows;
  rows.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s.r[i];
    rows.push_back({r, s.U[i], s.dU[i], s.Y[i], density(s, Z, r), angular_velocity(s, r)});
  }
  return rows;
}

void write_profile_csv(std::ostream& out, std::span<const ProfileRow> rows) {
  out << profile_header << '\n';
  for (const auto& row : rows) {
    out << format_double(row.r) << ',' << format_double(row.U) << ',' << format_double(row.dU) << ','
        << format_double(row.Y) << ',' << format_double(row.rho) << ',' << format_double(row.omega) << '\n';
  }
}

void write_profile_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows) {
  std::ostringstream os;
  write_profile_csv(os, rows);
  auto out = open_out(path);
  out << os.str();
  finish(out, path);
}

std::vector<ProfileRow> read_profile_csv(std::istream& in) {
  expect_header(in, profile_header);
  std::vector<ProfileRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw Error(ErrorCode::Io, "profile row needs 6 fields: " + line);
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                    parse_double(f[5])});
  }
  return rows;
}

std::vector<ProfileRow> read_profile_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_profile_csv(in);
}

void write_state_table_csv(std::ostream& out, const StateTable& table) {
  out << state_table_header << '\n';
  for (const auto& row : table.rows) {
    const ThermoState& s = row.state;
    for (double v : {s.params.T, s.params.X, s.Z, s.Ubar, s.Kbar, s.H, s.F, s.Ybar, s.r_m, s.L_s}) {
      out << format_double(v) << ',';
    }
    out << row.status << '\n';
  }
}

void write_state_table_csv(const std::filesystem::path& path, const StateTable& table) {
  std::ostringstream os;
  write_state_table_csv(os, table);
  auto out = open_out(path);
  out << os.str();
  finish(out, path);
}

StateTable read_state_table_csv(std::istream& in) {
  expect_header(in, state_table_header);
  StateTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) throw Error(ErrorCode::Io, "state table row needs 11 fields: " + line);
    StateRow row;
    ThermoState& s = row.state;
    s.params.T = parse_double(f[0]);
    s.params.X = parse_double(f[1]);
    s.Z = parse_double(f[2]);
    s.Ubar = parse_double(f[3]);
    s.Kbar = parse_double(f[4]);
    s.H = parse_double(f[5]);
    s.F = parse_double(f[6]);
    s.Ybar = parse_double(f[7]);
    s.r_m = parse_double(f[8]);
    s.L_s = parse_double(f[9]);
    s.Ebar = s.Ubar + s.Kbar;
    s.log_Z = std::log(s.Z);
    s.F_entropy = s.Ubar - s.params.T * s.H;
    row.status = f[10];
    table.rows.push_back(std::move(row));
  }
  return table;
}

StateTable read_state_table_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_state_table_csv(in);
}

std::map<std::string, std::string> read_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(number) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_config(in);
}

std::filesystem::path resolve_output(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  const char* dir = std::getenv("MADELUNG_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  return std::filesystem::path(dir) / path;
}

void check_figure_tag(std::string_view tag) {
  for (std::string_view known : {"fig1", "fig2", "fig3", "fig5", "fig7"}) {
    if (tag == known) return;
  }
  throw Error(ErrorCode::UnknownFigureTag, "unknown figure tag '" + std::string(tag) + "' (known: fig1 fig2 fig3 fig5 fig7)");
}

namespace {

struct Curve {
  double label = 0;
  std::vector<std::pair<double, double>> points;
};

// Rows grouped by the fixed axis, each group sorted along the other and kept when it has two points.
std::vector<Curve> curves(const StateTable& table, bool fixed_X, double (*y)(const ThermoState&)) {
  std::vector<Curve> out;
  const auto labels = fixed_X ? table.X_values() : table.T_values();
  for (double label : labels) {
    Curve c{label, {}};
    for (const StateRow* row : fixed_X ? table.at_X(label) : table.at_T(label)) {
      const ThermoState& s = row->state;
      c.points.emplace_back(fixed_X ? s.params.T : s.params.X, y(s));
    }
    if (c.points.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

void data_block(std::ostream& os, const std::string& name, const std::vector<std::pair<double, double>>& pts) {
  os << '$' << name << " << EOD\n";
  for (const auto& [x, y] : pts) os << format_double(x) << ' ' << format_double(y) << '\n';
  os << "EOD\n";
}

std::string table_figure(std::string_view tag, const PlotData& data) {
  if (data.table == nullptr) throw Error(ErrorCode::InsufficientData, std::string(tag) + " needs a state table");
  struct Spec {
    bool fixed_X;
    double (*y)(const ThermoState&);
    const char* xlabel;
    const char* ylabel;
    const char* key;
    bool logy;
    const char* title;
  };
  const auto ubar = [](const ThermoState& s) { return s.Ubar; };
  const auto rm = [](const ThermoState& s) { return s.r_m; };
  Spec spec{};
  if (tag == "fig2") spec = {true, ubar, "T", "Ubar", "X", true, "internal energy versus T"};
  if (tag == "fig3") spec = {false, ubar, "X", "Ubar", "T", true, "internal energy versus X"};
  if (tag == "fig5") spec = {false, rm, "X", "r_m", "T", true, "support radius versus X"};
  if (tag == "fig7") spec = {true, rm, "T", "r_m", "X", false, "support radius versus T"};

  const auto cs = curves(*data.table, spec.fixed_X, spec.y);
  if (cs.empty()) {
    throw Error(ErrorCode::InsufficientData, std::string(tag) + " needs at least two " + (spec.fixed_X ? "T" : "X") +
                                                 " values at a common " + spec.key);
  }
  std::ostringstream os;
  os << "# " << tag << ": " << spec.title << "\n";
  os << "set terminal pngcairo size 800,600\n";
  os << "set output " << quoted(std::string(tag) + ".png") << "\n";
  for (std::size_t i = 0; i < cs.size(); ++i) data_block(os, "d" + std::to_string(i), cs[i].points);
  os << "set logscale x\n";
  if (spec.logy) os << "set logscale y\n";
  os << "set xlabel " << quoted(spec.xlabel) << "\nset ylabel " << quoted(spec.ylabel) << "\n";
  os << "set key left top\n";
  os << "plot ";
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i > 0) os << ", \\\n     ";
    os << "$d" << i << " using 1:2 with linespoints title " << quoted(std::string(spec.key) + " = " + format_double(cs[i].label));
  }
  os << "\n";
  return os.str();
}

std::string profile_figure(const PlotData& data) {
  if (data.profiles.empty()) throw Error(ErrorCode::InsufficientData, "fig1 needs at least one profile");
  if (!(data.ground.k > 0.0)) throw Error(ErrorCode::InsufficientData, "fig1 needs the ground-state overlay");
  double r_max = data.ground.r_0;
  for (const auto& p : data.profiles) {
    if (!p.rows.empty()) r_max = std::max(r_max, p.rows.back().r);
  }
  std::ostringstream os;
  os << "# fig1: density and shifted potential versus r\n";
  os << "set terminal pngcairo size 800,1000\n";
  os << "set output 'fig1.png'\n";
  for (std::size_t i = 0; i < data.profiles.size(); ++i) {
    std::vector<std::pair<double, double>> rho, shifted;
    for (const auto& row : data.profiles[i].rows) {
      rho.emplace_back(row.r, row.rho);
      shifted.emplace_back(row.r, row.U - data.profiles[i].X);
    }
    data_block(os, "rho" + std::to_string(i), rho);
    data_block(os, "u" + std::to_string(i), shifted);
  }
  os << "A = " << format_double(data.ground.A) << "\n";
  os << "k = " << format_double(data.ground.k) << "\n";
  os << "r0 = " << format_double(data.ground.r_0) << "\n";
  os << "ground(x) = x < r0 ? (A*besj0(k*x))**2 : 1/0\n";
  os << "set samples 1000\n";
  os << "set xrange [0:" << format_double(r_max) << "]\n";
  os << "set multiplot layout 2,1\n";
  os << "set xlabel 'r'\nset ylabel 'rho'\n";
  os << "plot ";
  for (std::size_t i = 0; i < data.profiles.size(); ++i) {
    os << "$rho" << i << " using 1:2 with lines title " << quoted("T = " + format_double(data.profiles[i].T)) << ", \\\n     ";
  }
  os << "ground(x) with lines dashtype 2 title 'T -> 0'\n";
  os << "set ylabel 'U - X'\n";
  os << "set yrange [0:" << format_double(10 * data.ground.X) << "]\n";
  os << "plot ";
  for (std::size_t i = 0; i < data.profiles.size(); ++i) {
    if (i > 0) os << ", \\\n     ";
    os << "$u" << i << " using 1:2 with lines title " << quoted("T = " + format_double(data.profiles[i].T));
  }
  os << "\nunset multiplot\n";
  return os.str();
}

}  // namespace

std::string plot_script(std::string_view tag, const PlotData& data) {
  check_figure_tag(tag);
  if (tag == "fig1") return profile_figure(data);
  return table_figure(tag, data);
}

void emit_plot_script(std::string_view tag, const PlotData& data, const std::filesystem::path& path) {
  const std::string script = plot_script(tag, data);
  auto out = open_out(path);
  out << script;
  finish(out, path);
}

}  // namespace madelung
