#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "core/config.hpp"

using namespace stlmpc;

TEST_CASE("config parses key-value lines with comments and overrides") {
  const std::string text =
      "# environment setup\n"
      "n_traj = 2000\n"
      "spec = G (abs(x) < 0.1 & abs(theta) < 0.2094)  # cartpole goal\n"
      "\n"
      "sigma0 = 0.5\n"
      "n_traj = 400\n"
      "warm_start = true\n"
      "hidden = 256, 256\n"
      "seed=17\n";
  Config cfg = Config::parse(text, "inline");
  CHECK(cfg.has("n_traj"));
  CHECK(cfg.get_int("n_traj", 0) == 400);
  CHECK(cfg.get("spec", "") == "G (abs(x) < 0.1 & abs(theta) < 0.2094)");
  CHECK(cfg.get_double("sigma0", 0.0) == 0.5);
  CHECK(cfg.get_bool("warm_start", false));
  CHECK(cfg.get_int_list("hidden", {}) == std::vector<int>{256, 256});
  CHECK(cfg.get_u64("seed", 0) == 17);
  CHECK_FALSE(cfg.has("missing"));
  CHECK(cfg.get("missing", "dflt") == "dflt");
  CHECK(cfg.get_int("missing", -3) == -3);
}

TEST_CASE("boolean spellings") {
  Config cfg = Config::parse("a = yes\nb = 0\nc = off\nd = True\n", "inline");
  CHECK(cfg.get_bool("a", false));
  CHECK_FALSE(cfg.get_bool("b", true));
  CHECK_FALSE(cfg.get_bool("c", true));
  CHECK(cfg.get_bool("d", false));
  CHECK_THROWS_AS(Config::parse("a = maybe\n", "inline").get_bool("a", false), Error);
}

TEST_CASE("numeric parse failures name the origin") {
  Config cfg = Config::parse("lr = fast\n", "myfile.cfg");
  try {
    cfg.get_double("lr", 0.0);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("lr") != std::string::npos);
  }
  Config frac = Config::parse("epochs = 2.5\n", "inline");
  CHECK_THROWS_AS(frac.get_int("epochs", 0), Error);
}

TEST_CASE("missing equals sign is a parse error with a line number") {
  try {
    Config::parse("good = 1\nbad line\n", "cfg.txt");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("cfg.txt:2") != std::string::npos);
  }
}

TEST_CASE("require throws for absent keys") {
  Config cfg = Config::parse("x = 1\n", "inline");
  CHECK(cfg.require("x") == "1");
  CHECK_THROWS_AS(cfg.require("y"), Error);
}

TEST_CASE("env overrides collect numeric env-prefixed keys") {
  Config cfg = Config::parse("env.gravity = 9.8\nenv.dt = 0.02\nother = 5\n", "inline");
  auto ov = cfg.env_overrides();
  REQUIRE(ov.size() == 2);
  CHECK(ov.at("gravity") == 9.8);
  CHECK(ov.at("dt") == 0.02);
}

TEST_CASE("load from file and missing file error") {
  auto path = (std::filesystem::temp_directory_path() / "stlmpc_cfg_test.cfg").string();
  FILE* f = std::fopen(path.c_str(), "w");
  REQUIRE(f != nullptr);
  std::fputs("horizon = 10\n", f);
  std::fclose(f);
  Config cfg = Config::load(path);
  CHECK(cfg.get_int("horizon", 0) == 10);
  std::remove(path.c_str());
  CHECK_THROWS_AS(Config::load(path), Error);
}
