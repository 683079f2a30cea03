#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
  fs::path root;
  Sandbox() {
    root = fs::temp_directory_path() / ("tfimsim_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }

  fs::path config(const std::string& name, const json& doc) const {
    const fs::path p = root / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(TFIMSIM_PATH) + " " + args + " 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("couplings for an antiferromagnetic alpha=1 chain") {
  Sandbox box;
  const json doc = {{"synthetic", {{"j0", -1.0}, {"alpha", 1.0}}}, {"model", {{"n", 4}}}};
  const fs::path out = box.root / "out";
  REQUIRE(run("couplings --config " + box.config("c.json", doc).string() + " --out " +
              out.string()) == 0);
  const std::string csv = slurp(out / "couplings_N4.csv");
  CHECK(csv.rfind("i,j,j_khz\n", 0) == 0);
  CHECK(csv.find("\n1,3,-0.5\n") != std::string::npos);
  CHECK(csv.find("\n1,2,-1\n") != std::string::npos);
  CHECK(csv.find("\n1,1,0\n") != std::string::npos);

  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["commands"] == json::array({"couplings"}));
  CHECK(manifest["achieved"]["couplings"]["N4"]["j0_khz"] == -1.0);
}

TEST_CASE("resolved config reproduces itself") {
  Sandbox box;
  const json doc = {{"model", {{"n", 3}}}, {"ramp", {{"t_final", 1.5}}}};
  const fs::path a = box.root / "a";
  const fs::path b = box.root / "b";
  REQUIRE(run("couplings --config " + box.config("c.json", doc).string() + " --out " +
              a.string()) == 0);
  REQUIRE(run("couplings --config " + (a / "resolved_config.json").string() + " --out " +
              b.string()) == 0);
  json first = json::parse(slurp(a / "resolved_config.json"));
  json second = json::parse(slurp(b / "resolved_config.json"));
  first["output"].erase("dir");
  second["output"].erase("dir");
  CHECK(first == second);
}

TEST_CASE("user errors exit 1 with a structured record") {
  Sandbox box;
  const fs::path out = box.root / "out";
  const json cap = {{"model", {{"n", 17}}}};
  CHECK(run("couplings --config " + box.config("cap.json", cap).string() + " --out " +
            out.string()) == 1);
  CHECK(!fs::exists(out / "couplings_N17.csv"));

  const json unknown = {{"model", {{"n", 4}}}, {"mystery", true}};
  CHECK(run("couplings --config " + box.config("u.json", unknown).string()) == 1);

  CHECK(run("couplings --config " + (box.root / "missing.json").string()) == 1);
  CHECK(run("frobnicate --config " + box.config("ok.json", json::object()).string()) == 1);
  CHECK(run("couplings") == 1);
}

TEST_CASE("output directory precedence") {
  Sandbox box;
  const json doc = {{"model", {{"n", 2}}}, {"output", {{"dir", (box.root / "cfg").string()}}}};
  const std::string cfg = box.config("c.json", doc).string();
  REQUIRE(run("couplings --config " + cfg) == 0);
  CHECK(fs::exists(box.root / "cfg" / "couplings_N2.csv"));
  REQUIRE(run("couplings --config " + cfg + " --out " + (box.root / "flag").string()) == 0);
  CHECK(fs::exists(box.root / "flag" / "couplings_N2.csv"));
  const std::string env = "TFIM_OUT_DIR=" + (box.root / "env").string() + " ";
  REQUIRE(std::system((env + TFIMSIM_PATH + " couplings --config " + cfg + " >/dev/null 2>&1").c_str()) == 0);
  CHECK(fs::exists(box.root / "env" / "couplings_N2.csv"));
}

TEST_CASE("error record lands in the output directory") {
  Sandbox box;
  const fs::path out = box.root / "out";
  const json doc = {{"model", {{"n", 2}}}, {"ramp", {{"t_final", 1.0}, {"steps", 1}}},
                    {"numerics", {{"cn_max_steps", 2}}}};
  const int rc = run("ramp --config " + box.config("c.json", doc).string() + " --out " + out.string());
  CHECK(rc == 2);
  REQUIRE(fs::exists(out / "error.json"));
  const json err = json::parse(slurp(out / "error.json"));
  CHECK(err.contains("error"));
  CHECK(err.contains("message"));
}

}  // TEST_SUITE
