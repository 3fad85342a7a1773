#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "addpp/cli.hpp"
#include "addpp/empirical.hpp"
#include "addpp/fit.hpp"
#include "addpp/io.hpp"
#include "addpp/kde.hpp"
#include "addpp/metrics.hpp"
#include "addpp/simulate.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("addpp_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(std::initializer_list<std::string> args) {
  return addpp::cli::run(std::vector<std::string>(args));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_toy_events(const std::string& path, double duration, unsigned seed) {
  addpp::EventFileData data;
  data.processes = 1;
  data.duration = duration;
  data.per_process.push_back(addpp::bernoulli_toy(0.1, 1.0, duration, seed));
  addpp::write_event_csv(path, data);
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  TempDir dir("usage");
  CHECK(run({"simulate", "--kind", "constant", "--out", dir.file("e.csv")}) == 2);  // no seed
  CHECK(run({"simulate", "--kind", "bogus", "--seed", "1", "--out", dir.file("e.csv")}) == 2);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({}) == 2);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("simulate constant level zero writes a valid empty event file") {
  TempDir dir("constzero");
  const auto out = dir.file("events.csv");
  REQUIRE(run({"simulate", "--kind", "constant", "--level", "0", "--duration", "5",
               "--seed", "3", "--out", out}) == 0);
  const auto data = addpp::read_event_csv(out, std::nullopt, std::nullopt);
  CHECK(data.duration == 5.0);
  CHECK(data.per_process[0].empty());
  CHECK(fs::exists(dir.path / "truth_1.csv"));
  const auto truth = addpp::read_intensity_csv(dir.file("truth_1.csv"));
  for (double v : truth) CHECK(v == 0.0);
}

TEST_CASE("simulate sinusoidal sparse benchmark") {
  TempDir dir("sin");
  const auto out = dir.file("events.csv");
  REQUIRE(run({"simulate", "--kind", "sinusoidal", "--amplitude", "2", "--frequency",
               "62.83185307179586", "--duration", "10", "--seed", "1", "--out", out}) == 0);
  const auto data = addpp::read_event_csv(out, std::nullopt, std::nullopt);
  for (double t : data.per_process[0]) {
    CHECK(t >= 0.0);
    CHECK(t <= 10.0);
  }
  const auto truth = addpp::read_intensity_csv(dir.file("truth_1.csv"));
  REQUIRE(truth.size() == 100);
  double peak = 0.0, trough = 1e9;
  for (double v : truth) {
    peak = std::max(peak, v);
    trough = std::min(trough, v);
  }
  CHECK(peak <= 2.0);
  CHECK(peak > 1.9);
  CHECK(trough >= 0.0);
  CHECK(trough < 0.1);
}

TEST_CASE("simulate mixture writes one truth file per subset") {
  TempDir dir("mix");
  REQUIRE(run({"simulate", "--kind", "mixture", "--dims", "2", "--components", "5",
               "--count", "300", "--duration", "10", "--seed", "4", "--bins", "50",
               "--out", dir.file("events.csv")}) == 0);
  CHECK(fs::exists(dir.path / "truth_1.csv"));
  CHECK(fs::exists(dir.path / "truth_2.csv"));
  CHECK(fs::exists(dir.path / "truth_1-2.csv"));
  const auto data = addpp::read_event_csv(dir.file("events.csv"), std::nullopt, std::nullopt);
  CHECK(data.processes == 2);
  CHECK(data.per_process[0].size() == 300);
  CHECK(data.per_process[1].size() == 300);
}

TEST_CASE("fit validates flags and is byte-deterministic") {
  TempDir dir("fit");
  const auto events = dir.file("events.csv");
  write_toy_events(events, 100.0, 12);

  CHECK(run({"fit", "--input", events, "--order", "0", "--bins", "10", "--out",
             dir.file("m.model")}) == 2);
  CHECK(run({"fit", "--input", events, "--order", "2", "--bins", "10", "--out",
             dir.file("m.model")}) == 2);  // order exceeds D=1

  const auto model_a = dir.file("a.model");
  const auto model_b = dir.file("b.model");
  REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "20", "--bandwidth",
               "1", "--out", model_a}) == 0);
  REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "20", "--bandwidth",
               "1", "--out", model_b}) == 0);
  CHECK(slurp(model_a) == slurp(model_b));

  const auto mf = addpp::load_model(model_a);
  CHECK(mf.processes == 1);
  CHECK(mf.bins == 20);
  CHECK(mf.order == 1);
  CHECK(mf.converged);
}

TEST_CASE("one-process fit reproduces the kernel-smoothed intensity exactly") {
  // k = D = 1: the e-projection is the identity, so the recovered intensity
  // is the kernel-widened bump train that the smoother built
  TempDir dir("toy");
  const auto events = dir.file("events.csv");
  write_toy_events(events, 100.0, 8);
  const auto model = dir.file("toy.model");
  REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "100", "--bandwidth",
               "1", "--tol", "1e-10", "--out", model}) == 0);
  REQUIRE(run({"intensity", "--model", model, "--subset", "1", "--out",
               dir.file("intensity.csv")}) == 0);
  const auto got = addpp::read_intensity_csv(dir.file("intensity.csv"));

  const auto raw = addpp::read_event_csv(events, std::nullopt, std::nullopt);
  const auto data = addpp::extract_joint_events(raw.per_process, 100.0, 0.1, 1);
  const auto kde = addpp::kde_distribution(
      addpp::make_kde_model(*data.events_for(1u), 1.0, 100.0, 100));
  const auto want = addpp::kde_intensity(kde, data.count(1u), 100.0);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8));
}

TEST_CASE("eval: flag contract, exact-fit KL, closed-form NLL") {
  TempDir dir("eval");
  const auto events = dir.file("events.csv");
  write_toy_events(events, 100.0, 21);
  const auto model = dir.file("m.model");
  REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "25", "--bandwidth",
               "2", "--tol", "1e-11", "--out", model}) == 0);

  CHECK(run({"eval", "--model", model, "--subset", "1", "--metric", "kl"}) == 2);
  CHECK(run({"eval", "--model", model, "--subset", "1", "--metric", "nll"}) == 2);
  CHECK(run({"eval", "--model", model, "--subset", "1", "--metric", "huh"}) == 2);

  // truth = the training empirical intensity; k = D fits it exactly
  const auto raw = addpp::read_event_csv(events, std::nullopt, std::nullopt);
  const auto data = addpp::extract_joint_events(raw.per_process, 100.0, 0.1, 1);
  const auto cfg = addpp::make_smoother_config(data, 25, 2.0);
  const auto space = addpp::SampleSpace::build(1, 25, 100.0);
  const auto phat = addpp::empirical_distribution(data, cfg, space);
  const auto emp = addpp::intensity_estimate(phat, 1u, data, space);
  addpp::write_truth_csv(dir.file("truth.csv"), emp.per_bin);

  REQUIRE(run({"eval", "--model", model, "--subset", "1", "--metric", "kl", "--truth",
               dir.file("truth.csv"), "--append", dir.file("results.csv")}) == 0);
  const auto results = slurp(dir.file("results.csv"));
  CHECK(results.rfind("model,test,subset,metric,value\n", 0) == 0);
  const auto value = std::stod(results.substr(results.rfind(',') + 1));
  CHECK(value < 1e-8);

  // hand-written uniform model: constant intensity c = 20 / T
  addpp::ModelFile uniform;
  uniform.processes = 1;
  uniform.bins = 4;
  uniform.duration = 10.0;
  uniform.order = 1;
  uniform.window = 0.1;
  uniform.method = "natural";
  uniform.bandwidth[1u] = 1.0;
  uniform.counts[1u] = 20;
  for (int tau = 1; tau <= 4; ++tau)
    uniform.theta.emplace_back(addpp::PosetState{1u, tau, false}, 0.0);
  uniform.psi = std::log(5.0);
  addpp::save_model(uniform, dir.file("uniform.model"), false);

  addpp::EventFileData test;
  test.processes = 1;
  test.duration = 10.0;
  test.per_process.push_back({1.0, 4.4, 9.2});
  addpp::write_event_csv(dir.file("test.csv"), test);

  REQUIRE(run({"eval", "--model", dir.file("uniform.model"), "--subset", "1", "--metric",
               "nll", "--test", dir.file("test.csv"), "--append",
               dir.file("results.csv")}) == 0);
  const auto lines = slurp(dir.file("results.csv"));
  const double c = 2.0;  // 20 events over 10 seconds
  const double want = c * 10.0 - 3.0 * std::log(c);
  const auto last = lines.substr(lines.rfind(',') + 1);
  CHECK(std::stod(last) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("model files round-trip through text and json") {
  TempDir dir("roundtrip");
  const auto events = dir.file("events.csv");
  write_toy_events(events, 100.0, 31);

  for (const std::string format : {"text", "json"}) {
    const auto path = dir.file("m." + format);
    REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "15", "--bandwidth",
                 "1.5", "--format", format, "--out", path}) == 0);
    const auto mf = addpp::load_model(path);
    const auto space = addpp::model_space(mf);
    const auto domain = addpp::model_domain(mf, space);
    const auto params = addpp::model_params(mf, domain, space);
    CHECK(params.psi == doctest::Approx(mf.psi).epsilon(1e-12));
    // save again: byte-identical serialization of the reloaded model
    const auto copy = dir.file("copy." + format);
    addpp::save_model(mf, copy, format == "json");
    CHECK(slurp(path) == slurp(copy));
  }
}

TEST_CASE("intensity: unknown subset exits 2, empty subset writes zeros") {
  TempDir dir("intensity");
  const auto events = dir.file("events.csv");
  write_toy_events(events, 100.0, 41);
  const auto model = dir.file("m.model");
  REQUIRE(run({"fit", "--input", events, "--order", "1", "--bins", "10", "--bandwidth",
               "1", "--out", model}) == 0);

  CHECK(run({"intensity", "--model", model, "--subset", "2", "--out",
             dir.file("x.csv")}) == 2);
  CHECK(run({"intensity", "--model", model, "--subset", "0", "--out",
             dir.file("x.csv")}) == 2);

  // an events override with no events for the subset yields the zero vector
  addpp::EventFileData empty;
  empty.processes = 1;
  empty.duration = 100.0;
  empty.per_process.push_back({});
  addpp::write_event_csv(dir.file("empty.csv"), empty);
  REQUIRE(run({"intensity", "--model", model, "--subset", "1", "--events",
               dir.file("empty.csv"), "--out", dir.file("zero.csv")}) == 0);
  for (double v : addpp::read_intensity_csv(dir.file("zero.csv"))) CHECK(v == 0.0);
}

TEST_CASE("event file validation") {
  TempDir dir("badevents");
  {
    std::ofstream out(dir.file("bad_process.csv"), std::ios::binary);
    out << "# T=10\nprocess,timestamp\n3,1.0\n";
  }
  CHECK(run({"fit", "--input", dir.file("bad_process.csv"), "--dims", "2", "--order",
             "1", "--bins", "4", "--out", dir.file("m.model")}) == 2);
  {
    std::ofstream out(dir.file("bad_time.csv"), std::ios::binary);
    out << "# T=10\nprocess,timestamp\n1,11.0\n";
  }
  CHECK(run({"fit", "--input", dir.file("bad_time.csv"), "--order", "1", "--bins", "4",
             "--out", dir.file("m.model")}) == 2);
  {
    std::ofstream out(dir.file("no_header.csv"), std::ios::binary);
    out << "1,1.0\n";
  }
  CHECK(run({"fit", "--input", dir.file("no_header.csv"), "--order", "1", "--bins", "4",
             "--out", dir.file("m.model")}) == 2);
  {
    std::ofstream out(dir.file("no_duration.csv"), std::ios::binary);
    out << "process,timestamp\n1,1.0\n";
  }
  CHECK(run({"fit", "--input", dir.file("no_duration.csv"), "--order", "1", "--bins",
             "4", "--out", dir.file("m.model")}) == 2);
}

TEST_CASE("gridsearch: table file, determinism, fold mode") {
  TempDir dir("grid");
  const auto events = dir.file("events.csv");
  {
    addpp::EventFileData data;
    data.processes = 2;
    data.duration = 10.0;
    data.per_process.push_back(addpp::bernoulli_toy(0.9, 0.25, 10.0, 51));
    data.per_process.push_back(addpp::bernoulli_toy(0.9, 0.25, 10.0, 52));
    addpp::write_event_csv(events, data);
  }

  const auto table_a = dir.file("a.csv");
  REQUIRE(run({"gridsearch", "--input", events, "--h-grid", "0.5,1.0", "--m-grid", "5",
               "--order", "2", "--seed", "5", "--out", table_a}) == 0);
  const auto body = slurp(table_a);
  CHECK(body.rfind("h,M,score\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 3);  // header + 2 cells

  const auto table_b = dir.file("b.csv");
  REQUIRE(run({"gridsearch", "--input", events, "--h-grid", "0.5,1.0", "--m-grid", "5",
               "--order", "2", "--seed", "5", "--out", table_b}) == 0);
  CHECK(slurp(table_a) == slurp(table_b));

  const auto table_f = dir.file("folds.csv");
  REQUIRE(run({"gridsearch", "--input", events, "--h-grid", "0.5", "--m-grid", "5",
               "--order", "1", "--folds", "3", "--seed", "5", "--out", table_f}) == 0);
  CHECK(slurp(table_f).rfind("h,M,score\n", 0) == 0);

  CHECK(run({"gridsearch", "--input", events, "--h-grid", "0.5", "--m-grid", "5",
             "--order", "1", "--holdout", "1.5", "--out", table_f}) == 2);
  CHECK(run({"gridsearch", "--input", events, "--h-grid", "0.5", "--m-grid", "5",
             "--order", "1", "--folds", "1", "--out", table_f}) == 2);
}
