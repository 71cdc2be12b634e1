#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string cli_path;
fs::path work;

int run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " \"" + cli_path + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("run") == 2);  // --config is required
  CHECK(run("run --config \"" + (work / "nope.json").string() + "\"") == 2);
  write(work / "neg.json", R"({"fig5": {"noise_variance": -1}})");
  CHECK(run("validate --config \"" + (work / "neg.json").string() + "\"") == 2);
  write(work / "ok.json", R"({"experiment": "fig3-detect-curve", "fig3": {"n_grid": [10, 20]}})");
  CHECK(run("validate --config \"" + (work / "ok.json").string() + "\"") == 0);
  CHECK(run("run --config \"" + (work / "ok.json").string() + "\" --seed abc") == 2);
  CHECK(run("run --config \"" + (work / "ok.json").string() + "\"", "COGNISCOPE_SEED=xyz") == 2);
  write(work / "garbage_model.json", "{\"format\": \"something-else\"}");
  CHECK(run("learn-mod classify --model \"" + (work / "garbage_model.json").string() + "\" --out \"" +
            (work / "g").string() + "\"") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("seed precedence: flag, then environment, then config") {
  write(work / "seeded.json", R"({"experiment": "fig3-detect-curve", "seed": 3, "fig3": {"n_grid": [10]}})");
  const auto cfg = "--config \"" + (work / "seeded.json").string() + "\"";
  auto seed_of = [&](const fs::path& out) {
    const auto s = slurp(out / "fig3-detect-curve.log");
    const auto at = s.find("seed ");
    return s.substr(at + 5, s.find('\n', at) - at - 5);
  };
  REQUIRE(run("run " + cfg + " --out \"" + (work / "s1").string() + "\"") == 0);
  CHECK(seed_of(work / "s1") == "3");
  REQUIRE(run("run " + cfg + " --out \"" + (work / "s2").string() + "\"", "COGNISCOPE_SEED=11") == 0);
  CHECK(seed_of(work / "s2") == "11");
  REQUIRE(run("run " + cfg + " --seed 12 --out \"" + (work / "s3").string() + "\"", "COGNISCOPE_SEED=11") == 0);
  CHECK(seed_of(work / "s3") == "12");
}

TEST_CASE("module verbs write their artifacts") {
  const auto out = work / "verbs";
  write(work / "small.json", R"({"fig4": {"train_frames_per_state": 50, "test_frames_per_state": 50},
      "fig5": {"n_sweeps": 60, "burn_in": 20},
      "fig6": {"trials": 2, "horizon": 200, "vacancy_grid": [0.3, 0.6]}})");
  const auto cfg = " --config \"" + (work / "small.json").string() + "\" --out \"" + out.string() + "\"";
  CHECK(run("learn-power cluster" + cfg) == 0);
  CHECK(fs::exists(out / "learn_power_states.csv"));
  CHECK(run("learn-power train" + cfg) == 0);
  CHECK(slurp(out / "learn_power_model.txt").rfind("cogniscope-margin-classifier 1", 0) == 0);
  CHECK(run("learn-mod fit" + cfg) == 0);
  CHECK(slurp(out / "learn_mod_components.csv").rfind("component,weight,mu_c21,mu_c40,mu_c42,matched_mod,est_power", 0) == 0);
  const auto model = " --model \"" + (out / "learn_mod_model.json").string() + "\"";
  CHECK(run("learn-mod classify" + model + cfg) == 0);
  CHECK(fs::exists(out / "learn_mod_classified.csv"));
  CHECK(run("learn-mod update" + model + cfg) == 0);
  CHECK(run("predict run" + cfg) == 0);
  CHECK(slurp(out / "fig6-occupancy-prediction_curve.csv")
            .rfind("vacancy_prob,mean_throughput_learned,mean_throughput_random,mean_pred_error\n", 0) == 0);
  CHECK(slurp(out / "predict_history.csv").rfind("channel,slot,sensed_state\n", 0) == 0);
  CHECK(run("detect-curve --fix-pfa 0.1 --mc-trials 500" + cfg) == 0);
  CHECK(slurp(out / "fig3-detect-curve_curve.csv").rfind("n,pfa,pd,pdisc,pfa_mc,pd_mc,pdisc_mc\n", 0) == 0);
  CHECK(run("detect-curve --fix-pfa 1.5" + cfg) == 2);
}

int main(int argc, char** argv) {
  if (argc < 3) return 2;
  cli_path = argv[1];
  work = argv[2];
  fs::remove_all(work);
  fs::create_directories(work);
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 2, argv + 2);
  return ctx.run();
}
