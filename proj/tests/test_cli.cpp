#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "madelung/cli.hpp"
#include "madelung/io.hpp"

using madelung::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "madelung_test_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

}  // namespace

TEST_CASE("solve writes a profile") {
  const auto path = scratch_dir() / "profile.csv";
  std::filesystem::remove(path);
  const Result r = call({"solve", "--T", "1", "--X", "1", "--profile-out", path.string()});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "Kbar = 1"));
  REQUIRE(std::filesystem::exists(path));
  const auto rows = madelung::read_profile_csv(path);
  CHECK(rows.size() > 100);
  CHECK(slurp(path).rfind("r,U,dU,Y,rho,omega\n", 0) == 0);
}

TEST_CASE("solve csv format prints a state-table row") {
  const Result r = call({"solve", "--T", "1", "--X", "1", "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("T,X,Z,Ubar,Kbar,H,F,Ybar,r_m,L_s,status\n1,1,", 0) == 0);
  CHECK(r.out.find(",ok\n") != std::string::npos);
}

TEST_CASE("validation errors exit with 1 and name the parameter") {
  const Result r = call({"solve", "--T", "-1", "--X", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("parameter T") != std::string::npos);
  CHECK(call({"solve", "--X", "0"}).code == 1);
  CHECK(call({"solve", "--T", "abc"}).code == 1);
  CHECK(call({"solve", "--rtol", "-1"}).code == 1);
  CHECK(call({"solve", "--bogus", "1"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"sweep", "--T-values", "1,-2"}).code == 1);
  CHECK(call({"sweep", "--figure", "fig4", "--plot-out", "x.gp"}).code == 1);
  CHECK(call({"fit", "--mode", "Q"}).code == 1);
}

TEST_CASE("numerical failures exit with 2") {
  const Result r = call({"solve", "--max-steps", "5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("max_steps_exceeded") != std::string::npos);
}

TEST_CASE("help exits with 0") {
  const Result r = call({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("tensions") != std::string::npos);
}

TEST_CASE("verify reports the kinetic identity") {
  const Result r = call({"verify", "--T", "1", "--X", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS kinetic_identity") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("config precedence: flags over file over defaults") {
  const auto cfg = scratch_dir() / "run.cfg";
  write(cfg, "# solve settings\nT = 2\nX = 0.5\nrtol = 1e-9\n");
  const Result from_file = call({"solve", "--config", cfg.string()});
  CHECK(from_file.code == 0);
  CHECK(has_line(from_file.out, "T = 2"));
  CHECK(has_line(from_file.out, "X = 0.5"));
  const Result flag_wins = call({"solve", "--config", cfg.string(), "--T", "3"});
  CHECK(has_line(flag_wins.out, "T = 3"));
  CHECK(has_line(flag_wins.out, "X = 0.5"));
  const Result defaults = call({"solve"});
  CHECK(has_line(defaults.out, "T = 1"));

  write(cfg, "T = 2\nbogus = 1\n");
  const Result unknown = call({"solve", "--config", cfg.string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("bogus") != std::string::npos);
  // grid keys exist for sweep but not for solve
  write(cfg, "T-values = 1,2\n");
  CHECK(call({"solve", "--config", cfg.string()}).code == 1);
  CHECK(call({"sweep", "--config", cfg.string()}).code == 0);
  CHECK(call({"solve", "--config", (scratch_dir() / "missing.cfg").string()}).code == 1);
}

TEST_CASE("sweep output is deterministic") {
  const auto dir = scratch_dir();
  const std::vector<std::string> base{"sweep", "--T-values", "0.5,1,2", "--X-values", "0.5,1", "--threads", "3"};
  auto a = base, b = base;
  a.insert(a.end(), {"--table-out", (dir / "a.csv").string()});
  b.insert(b.end(), {"--table-out", (dir / "b.csv").string(), "--threads", "1"});
  b.erase(b.begin() + 5, b.begin() + 7);
  REQUIRE(call(a).code == 0);
  REQUIRE(call(b).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(madelung::read_state_table_csv(dir / "a.csv").rows.size() == 6);
}

TEST_CASE("sweep writes plot scripts") {
  const auto dir = scratch_dir();
  const Result r = call({"sweep", "--T-values", "0.5,1,2", "--X-values", "0.5,1", "--figure", "fig7", "--plot-out",
                         (dir / "fig7.gp").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "fig7.gp").find("r_m") != std::string::npos);
  CHECK(call({"sweep", "--figure", "fig2", "--plot-out", (dir / "f.gp").string()}).code == 1);
}

TEST_CASE("output directory") {
  const auto dir = scratch_dir() / "env_out";
  std::filesystem::remove_all(dir);
  ::setenv("MADELUNG_OUTPUT_DIR", dir.string().c_str(), 1);
  CHECK(call({"solve", "--profile-out", "p.csv"}).code == 0);
  CHECK(std::filesystem::exists(dir / "p.csv"));
  const auto flag_dir = scratch_dir() / "flag_out";
  CHECK(call({"solve", "--profile-out", "p.csv", "--output-dir", flag_dir.string()}).code == 0);
  CHECK(std::filesystem::exists(flag_dir / "p.csv"));
  ::unsetenv("MADELUNG_OUTPUT_DIR");
}

TEST_CASE("fit reads a table without modifying it") {
  const auto dir = scratch_dir();
  const auto table = dir / "fit_input.csv";
  REQUIRE(call({"sweep", "--T-range", "10,100,5", "--X", "1", "--table-out", table.string()}).code == 0);
  const std::string before = slurp(table);
  const auto stamp = std::filesystem::last_write_time(table);
  const Result r = call({"fit", "--table", table.string(), "--mode", "T", "--X", "1", "--window", "10,100"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fit.exponent = ") != std::string::npos);
  CHECK(r.out.find("fit.residual_norm = ") != std::string::npos);
  CHECK(slurp(table) == before);
  CHECK(std::filesystem::last_write_time(table) == stamp);
  CHECK(call({"fit", "--table", table.string(), "--mode", "T", "--X", "2"}).code == 1);
}

TEST_CASE("limits and tensions reports") {
  const Result l = call({"limits", "--X", "1", "--T-values", "0.1,0.05"});
  CHECK(l.code == 0);
  CHECK(l.out.find("B_0 = 2.40482555769577") != std::string::npos);
  const auto fig1 = scratch_dir() / "fig1.gp";
  CHECK(call({"limits", "--T-values", "0.05,0.2,1", "--figure", "fig1", "--plot-out", fig1.string()}).code == 0);
  CHECK(slurp(fig1).find("besj0") != std::string::npos);

  const Result t = call({"tensions", "--T", "1", "--X", "1"});
  CHECK(t.code == 0);
  CHECK(t.out.find("sigma_X = ") != std::string::npos);
  CHECK(t.out.find("first_law.residual_X = ") != std::string::npos);
}

TEST_CASE("installed binary exit codes") {
  const std::string tool = MADELUNG_TOOL;
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("solve --T 1 --X 1") == 0);
  CHECK(status("solve --T -1 --X 1") == 1);
  CHECK(status("solve --max-steps 5") == 2);
}
