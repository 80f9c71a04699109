#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "stlmpc/stlmpc.h"

namespace {

std::string temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "stlmpc_capi_test";
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("version string is present") {
  const char* v = stlmpc_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
}

TEST_CASE("formula parse, print, and error reporting") {
  stlmpc_formula* f = nullptr;
  REQUIRE(stlmpc_formula_parse("G (abs(x) < 0.1 & abs(theta) < 0.2094)", &f) == STLMPC_OK);
  REQUIRE(f != nullptr);

  size_t needed = 0;
  CHECK(stlmpc_formula_to_string(f, nullptr, 0, &needed) == STLMPC_OK);
  REQUIRE(needed > 1);
  std::vector<char> buf(needed);
  CHECK(stlmpc_formula_to_string(f, buf.data(), buf.size(), &needed) == STLMPC_OK);
  std::string printed(buf.data());
  CHECK(printed.find("abs(x)") != std::string::npos);

  stlmpc_formula* again = nullptr;
  REQUIRE(stlmpc_formula_parse(printed.c_str(), &again) == STLMPC_OK);
  std::vector<char> buf2(needed);
  CHECK(stlmpc_formula_to_string(again, buf2.data(), buf2.size(), &needed) == STLMPC_OK);
  CHECK(std::string(buf2.data()) == printed);
  stlmpc_formula_free(again);
  stlmpc_formula_free(f);

  stlmpc_formula* bad = nullptr;
  CHECK(stlmpc_formula_parse("G (x <", &bad) == STLMPC_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(std::strlen(stlmpc_last_error()) > 0);
  CHECK(stlmpc_formula_parse(nullptr, &bad) == STLMPC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("trace construction and evaluation") {
  const char* names[] = {"x"};
  stlmpc_trace* tr = nullptr;
  REQUIRE(stlmpc_trace_create(names, 1, &tr) == STLMPC_OK);
  for (double v : {0.1, 0.3, 0.6}) {
    double sample[1] = {v};
    REQUIRE(stlmpc_trace_append(tr, sample, 1) == STLMPC_OK);
  }
  CHECK(stlmpc_trace_length(tr) == 3);
  CHECK(stlmpc_trace_dim(tr) == 1);

  double bad_sample[2] = {0.0, 0.0};
  CHECK(stlmpc_trace_append(tr, bad_sample, 2) == STLMPC_ERR_DIMENSION);

  stlmpc_formula* f = nullptr;
  REQUIRE(stlmpc_formula_parse("F (x > 0.4)", &f) == STLMPC_OK);
  double rho = 0.0;
  int sat = -1;
  REQUIRE(stlmpc_robustness(f, tr, 0, &rho) == STLMPC_OK);
  CHECK(rho == doctest::Approx(0.2).epsilon(1e-12));
  REQUIRE(stlmpc_satisfies(f, tr, 0, &sat) == STLMPC_OK);
  CHECK(sat == 1);
  CHECK(stlmpc_robustness(f, tr, 9, &rho) == STLMPC_ERR_INVALID_ARGUMENT);

  stlmpc_formula* unknown = nullptr;
  REQUIRE(stlmpc_formula_parse("F (zz > 0)", &unknown) == STLMPC_OK);
  CHECK(stlmpc_robustness(unknown, tr, 0, &rho) == STLMPC_ERR_UNKNOWN_NAME);
  CHECK(std::string(stlmpc_last_error()).find("zz") != std::string::npos);
  stlmpc_formula_free(unknown);
  stlmpc_formula_free(f);
  stlmpc_trace_free(tr);
}

TEST_CASE("environment round trip") {
  stlmpc_env* env = nullptr;
  REQUIRE(stlmpc_env_create("cartpole", &env) == STLMPC_OK);
  CHECK(stlmpc_env_state_dim(env) == 4);
  CHECK(stlmpc_env_action_dim(env) == 1);

  double s[4];
  REQUIRE(stlmpc_env_reset(env, 7, s) == STLMPC_OK);
  for (double v : s) {
    CHECK(v >= -0.05);
    CHECK(v <= 0.05);
  }
  double next[4], reward = 0;
  int has_reward = 0, done = 0;
  double action[1] = {10.0};
  REQUIRE(stlmpc_env_step(env, s, action, next, &reward, &has_reward, &done) == STLMPC_OK);
  CHECK(has_reward == 1);
  CHECK(reward == 1.0);
  CHECK(done == 0);
  stlmpc_env_free(env);

  stlmpc_env* bad = nullptr;
  CHECK(stlmpc_env_create("walker2d", &bad) == STLMPC_ERR_UNKNOWN_NAME);
  CHECK(bad == nullptr);
}

TEST_CASE("cmaes ask tell best through the c interface") {
  double mean0[2] = {1.0, 1.0};
  stlmpc_cmaes* opt = nullptr;
  REQUIRE(stlmpc_cmaes_create(2, mean0, 0.5, 0, 99, &opt) == STLMPC_OK);
  int lambda = stlmpc_cmaes_lambda(opt);
  CHECK(lambda == 6);

  std::vector<double> cands(static_cast<size_t>(lambda) * 2);
  std::vector<double> fits(lambda);
  double best_f = -1e300;
  for (int gen = 0; gen < 150; ++gen) {
    REQUIRE(stlmpc_cmaes_ask(opt, cands.data()) == STLMPC_OK);
    for (int i = 0; i < lambda; ++i) {
      double x = cands[2 * i], y = cands[2 * i + 1];
      fits[i] = -(x * x + y * y);
    }
    REQUIRE(stlmpc_cmaes_tell(opt, cands.data(), fits.data()) == STLMPC_OK);
    double x[2];
    REQUIRE(stlmpc_cmaes_best(opt, x, &best_f) == STLMPC_OK);
    if (best_f > -1e-10) break;
  }
  CHECK(best_f > -1e-10);
  stlmpc_cmaes_free(opt);

  stlmpc_cmaes* bad = nullptr;
  CHECK(stlmpc_cmaes_create(0, nullptr, 0.5, 0, 1, &bad) == STLMPC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("pipeline: collect, train, model forward, run, check") {
  std::string dir = temp_dir();
  std::string ds_path = dir + "/capi_ds.csv";
  std::string ckpt_path = dir + "/capi_model.json";

  stlmpc_collect_options copts{};
  copts.env_id = "mountain_car";
  copts.n_traj = 10;
  copts.episode_len = 30;
  copts.seed = 5;
  copts.out_path = ds_path.c_str();
  stlmpc_collect_result cres{};
  REQUIRE(stlmpc_collect(&copts, &cres) == STLMPC_OK);
  CHECK(cres.n_transitions == 300);
  CHECK(std::filesystem::exists(cres.dataset_path));
  CHECK(std::filesystem::exists(cres.manifest_path));

  int hidden[2] = {16, 16};
  stlmpc_train_options topts{};
  topts.dataset_path = ds_path.c_str();
  topts.hidden = hidden;
  topts.n_hidden = 2;
  topts.epochs = 8;
  topts.batch_size = 64;
  topts.seed = 3;
  topts.out_path = ckpt_path.c_str();
  stlmpc_train_result tres{};
  REQUIRE(stlmpc_train(&topts, &tres) == STLMPC_OK);
  CHECK(tres.epochs == 8);
  CHECK(std::isfinite(tres.final_train_loss));
  CHECK(std::filesystem::exists(tres.checkpoint_path));
  CHECK(std::filesystem::exists(tres.loss_curve_path));

  stlmpc_model* model = nullptr;
  REQUIRE(stlmpc_model_load(ckpt_path.c_str(), &model) == STLMPC_OK);
  CHECK(stlmpc_model_state_dim(model) == 2);
  CHECK(stlmpc_model_action_dim(model) == 1);
  double s[2] = {-0.5, 0.0};
  double a[1] = {0.5};
  double sp[2];
  REQUIRE(stlmpc_model_forward(model, s, a, sp) == STLMPC_OK);
  CHECK(std::isfinite(sp[0]));
  CHECK(std::isfinite(sp[1]));
  stlmpc_model_free(model);

  stlmpc_run_options ropts{};
  ropts.env_id = "mountain_car";
  ropts.checkpoint_path = ckpt_path.c_str();
  ropts.spec_text = "F (x > 0.4)";
  ropts.horizon = 4;
  ropts.n_iter = 2;
  ropts.n_samples = 8;
  ropts.episodes = 2;
  ropts.max_steps = 12;
  ropts.seed = 9;
  std::string run_dir = dir + "/capi_run";
  ropts.out_dir = run_dir.c_str();
  stlmpc_run_result rres{};
  REQUIRE(stlmpc_run(&ropts, &rres) == STLMPC_OK);
  CHECK(rres.episodes == 2);
  CHECK(rres.has_reward == 1);
  CHECK(std::isfinite(rres.rho_mean));
  CHECK(std::filesystem::exists(rres.summary_path));

  // check-spec over a tiny hand trace
  std::string trace_path = dir + "/capi_trace.csv";
  {
    FILE* f = std::fopen(trace_path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("x\n0.1\n0.45\n", f);
    std::fclose(f);
  }
  stlmpc_check_options kopts{};
  kopts.spec_text = "F (x > 0.4)";
  kopts.trace_path = trace_path.c_str();
  stlmpc_check_result kres{};
  REQUIRE(stlmpc_check_spec(&kopts, &kres) == STLMPC_OK);
  CHECK(kres.rho == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(kres.sat == 1);
  CHECK(std::string(kres.canonical_spec).find("0.4") != std::string::npos);

  // both or neither spec source is an error
  stlmpc_check_options both = kopts;
  both.spec_path = trace_path.c_str();
  CHECK(stlmpc_check_spec(&both, &kres) == STLMPC_ERR_INVALID_ARGUMENT);

  stlmpc_model* missing = nullptr;
  CHECK(stlmpc_model_load((dir + "/nope.json").c_str(), &missing) == STLMPC_ERR_IO);

  std::filesystem::remove_all(dir);
}
