#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = STOIC_CLI;
const fs::path kToy = fs::path(STOIC_TEST_DATA) / "toy.csv";
const fs::path kFixtures = STOIC_FIXTURES;
const std::string kFast = " --iterations 1 --outer-folds 3 --inner-folds 2 --trials 3";

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("stoic_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, std::string* output = nullptr) {
  const auto log = work_dir() / "last.log";
  const std::string cmd = "'" + kCli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run("") == 2);
  CHECK(run("evaluate") == 2);
  CHECK(run("evaluate --data x --bogus 1") == 2);
  CHECK(run("ingest") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("domain errors exit 1") {
  std::string out;
  CHECK(run("evaluate --data /nonexistent.csv", &out) == 1);
  CHECK(out.find("/nonexistent.csv") != std::string::npos);
  CHECK(run("ingest --fixtures /no/such/fixtures --out " + q(work_dir() / "x.csv"), &out) == 1);
  CHECK(out.find("/no/such/fixtures") != std::string::npos);
  CHECK(run("evaluate --data " + q(kToy) + " --model tree --out " + q(work_dir() / "bad")) == 1);
  CHECK(run("ablate --data " + q(kToy) + " --grid 0:10:1 --out " + q(work_dir() / "bad")) == 1);
  CHECK(run("export-weights --model /no/model.json --out " + q(work_dir() / "bad")) == 1);
}

TEST_CASE("ingest from fixtures and from csv") {
  const auto out = work_dir() / "corpus.csv";
  std::string log;
  REQUIRE(run("ingest --fixtures " + q(kFixtures / "basic") + " --cap 2 --out " + q(out), &log) == 0);
  const auto csv = slurp(out);
  CHECK(csv == "id,sequence,stoichiometry\n1AAA_1,MASNFTQFVL,60\n1BBB_1,MKTAYIAKQRQISFVK,60\n"
               "2AAA_1,GAVLIKRHDE,180\n2BBB_1,PPGWYFSTNQCM,180\n");
  CHECK(log.find("60-mer") != std::string::npos);
  CHECK(run("ingest --fixtures " + q(kFixtures / "basic") + " --cap 3 --out " + q(out)) == 1);
  REQUIRE(run("ingest --csv " + q(kToy), &log) == 0);
  CHECK(log.find("records: 40") != std::string::npos);
}

TEST_CASE("evaluate writes runs and summary; --all gives 12 rows") {
  const auto dir = work_dir() / "eval";
  REQUIRE(run("evaluate --data " + q(kToy) + kFast + " --out " + q(dir)) == 0);
  CHECK(lines(slurp(dir / "runs.csv")) == 1 + 3);
  CHECK(lines(slurp(dir / "summary.csv")) == 2);

  const auto all = work_dir() / "eval_all";
  REQUIRE(run("evaluate --all --data " + q(kToy) + kFast + " --out " + q(all)) == 0);
  CHECK(lines(slurp(all / "summary.csv")) == 1 + 12);
  CHECK(lines(slurp(all / "runs.csv")) == 1 + 12 * 3);
}

TEST_CASE("config file values are overridden by flags") {
  const auto cfg = work_dir() / "cfg.json";
  std::ofstream(cfg) << R"({"iterations": 1, "outer-folds": 3, "inner-folds": 2, "trials": 9, "model": "svm"})";
  REQUIRE(run("evaluate --config " + q(cfg) + " --data " + q(kToy) + " --trials 3 --out " + q(work_dir() / "c1")) == 0);
  REQUIRE(run("evaluate --data " + q(kToy) + kFast + " --model svm --out " + q(work_dir() / "c2")) == 0);
  CHECK(slurp(work_dir() / "c1" / "runs.csv") == slurp(work_dir() / "c2" / "runs.csv"));
  CHECK(slurp(work_dir() / "c1" / "summary.csv").find("svm") != std::string::npos);
}

TEST_CASE("ablate grid shape and prefix identity") {
  const auto dir = work_dir() / "abl";
  REQUIRE(run("ablate --data " + q(kToy) + kFast + " --method weights --grid 1:40:1 --out " + q(dir)) == 0);
  CHECK(lines(slurp(dir / "ablation.csv")) == 41);
  CHECK(slurp(dir / "positions.json").find("\"weights\"") != std::string::npos);

  const auto pre = work_dir() / "pre";
  REQUIRE(run("ablate --data " + q(kToy) + kFast + " --method prefix --grid 100:100:1 --map clusters --out " + q(pre)) == 0);
  REQUIRE(run("evaluate --data " + q(kToy) + kFast + " --map clusters --out " + q(pre)) == 0);
  const auto ab = slurp(pre / "ablation.csv");
  const auto summary = slurp(pre / "summary.csv");
  const auto second_line = summary.substr(summary.find('\n') + 1);
  // summary: encoding,map,model,n_runs,auroc_mean,...; ablation: method,percent,mean_auroc,...
  std::stringstream s1(second_line), s2(ab.substr(ab.find('\n') + 1));
  std::string f;
  std::vector<std::string> a, b;
  while (std::getline(s1, f, ',')) a.push_back(f);
  while (std::getline(s2, f, ',')) b.push_back(f);
  REQUIRE(a.size() > 4);
  REQUIRE(b.size() > 2);
  CHECK(a[4] == b[2]);
}

TEST_CASE("train and export weights") {
  const auto model = work_dir() / "model.json";
  REQUIRE(run("train --data " + q(kToy) + " --map clusters --regularization 2.5 --out " + q(model)) == 0);
  const auto dir = work_dir() / "weights";
  REQUIRE(run("export-weights --model " + q(model) + " --out " + q(dir)) == 0);
  const auto weights = slurp(dir / "weights.csv");
  CHECK(weights.rfind("position,category,weight\n", 0) == 0);
  CHECK(weights.find(",aliphatic,") != std::string::npos);
  CHECK(lines(slurp(dir / "positional.csv")) == 1 + 50);
  REQUIRE(run("train --data " + q(kToy) + " --model logistic --trials 4 --inner-folds 3 --out " + q(model)) == 0);
}

TEST_CASE("every command is byte-deterministic") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"ingest --fixtures " + q(kFixtures / "basic") + " --cap 2 --out {}/corpus.csv", {"corpus.csv"}},
      {"evaluate --all --data " + q(kToy) + kFast + " --out {}", {"runs.csv", "summary.csv"}},
      {"ablate --method all --data " + q(kToy) + kFast + " --grid 5:50:15 --out {}", {"ablation.csv", "positions.json"}},
      {"train --data " + q(kToy) + " --model svm --trials 4 --inner-folds 3 --out {}/model.json", {"model.json"}},
  };
  int index = 0;
  for (const auto& [pattern, files] : commands) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = work_dir() / ("det" + std::to_string(index) + "_" + std::to_string(rep));
      fs::create_directories(dir);
      std::string cmd = pattern;
      cmd.replace(cmd.find("{}"), 2, q(dir));
      REQUIRE(run(cmd) == 0);
      for (const auto& f : files) outputs[rep] += slurp(dir / f);
    }
    CHECK(outputs[0] == outputs[1]);
    ++index;
  }
  const auto m0 = work_dir() / "det3_0" / "model.json";
  const auto w0 = work_dir() / "det_w0", w1 = work_dir() / "det_w1";
  REQUIRE(run("export-weights --model " + q(m0) + " --out " + q(w0)) == 0);
  REQUIRE(run("export-weights --model " + q(m0) + " --out " + q(w1)) == 0);
  CHECK(slurp(w0 / "weights.csv") == slurp(w1 / "weights.csv"));
  CHECK(slurp(w0 / "positional.csv") == slurp(w1 / "positional.csv"));
}
