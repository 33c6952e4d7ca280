#include "lgspec/app/cache.hpp"
#include "lgspec/app/export.hpp"
#include "lgspec/app/run_config.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

using namespace lgspec;
using namespace lgspec::app;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lgspec_test_app_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config() {
  RunConfig c;
  c.model = GaussianWnParams{0.35};
  c.n = 600;
  c.points = {"50::50", "90::90"};
  c.truncation = 3;
  c.grid = 33;
  c.replicates = 7;
  c.seed = 7;
  return c;
}

}  // namespace

TEST(PercentileToPoint, Examples) {
  const Point mid = percentile_to_point("50::50");
  EXPECT_DOUBLE_EQ(mid.v1, 0.0);
  EXPECT_DOUBLE_EQ(mid.v2, 0.0);
  const Point off = percentile_to_point("10::90");
  EXPECT_NEAR(off.v1, -1.2816, 1e-4);
  EXPECT_NEAR(off.v2, 1.2816, 1e-4);
  const Point pct = percentile_to_point("10%::10%");
  EXPECT_NEAR(pct.v1, -1.2816, 1e-4);
}

TEST(PercentileToPoint, RejectsBoundaryAndMalformed) {
  for (const char* bad : {"0::50", "50::100", "10:10", "a::b", "10::", "10::10::10", ""}) {
    EXPECT_THROW(percentile_to_point(bad), ConfigError) << bad;
  }
}

TEST(RunConfigText, RoundTripsEveryFigure) {
  for (const auto& name : figure_names()) {
    RunConfig c = figure_config(name);
    c.output = "out/" + name;
    EXPECT_EQ(parse_config(to_text(c)), c) << name;
    EXPECT_EQ(to_text(parse_config(to_text(c))), to_text(c)) << name;
  }
}

TEST(RunConfigText, RoundTripsCustomValues) {
  RunConfig c = small_config();
  c.bandwidth = {0.45, 0.7};
  c.order = ApproxOrder::one;
  c.window = LagWindow::parzen;
  c.lower_prob = 0.025;
  c.upper_prob = 0.975;
  c.seed = 18446744073709551615ULL;
  EXPECT_EQ(parse_config(to_text(c)), c);

  LocalTrigParams t = LocalTrigParams::individual_phases();
  t.amplitude[0] = 0.123456789012345;
  c.model = t;
  EXPECT_EQ(parse_config(to_text(c)), c);

  c.model = CosineParams{0.1, 0.2, 0.3};
  EXPECT_EQ(parse_config(to_text(c)), c);
}

TEST(RunConfigText, ParsesHandWrittenFile) {
  const RunConfig c = parse_config(R"(
# comment
[data]
source = model
n = 500
[model]
name = cosine
alpha = 0.25   # trailing comment
[estimation]
points = 10::10, 90::90
bandwidth = 0.5
window = bartlett
[bands]
mode = none
)");
  EXPECT_EQ(c.n, 500);
  ASSERT_TRUE(std::holds_alternative<CosineParams>(c.model));
  EXPECT_DOUBLE_EQ(std::get<CosineParams>(c.model).alpha, 0.25);
  EXPECT_EQ(c.points, (std::vector<std::string>{"10::10", "90::90"}));
  EXPECT_DOUBLE_EQ(c.bandwidth.b2, 0.5);
  EXPECT_EQ(c.window, LagWindow::bartlett);
  EXPECT_EQ(c.bands, BandMode::none);
}

TEST(RunConfigText, FieldLevelErrors) {
  auto field_of = [](const std::string& text) {
    try {
      validate(parse_config(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of("[estimation]\nfoo = 1\n"), "estimation.foo");
  EXPECT_EQ(field_of("[estimation]\ntruncation = 0\n"), "estimation.truncation");
  EXPECT_EQ(field_of("[estimation]\ntruncation = ten\n"), "estimation.truncation");
  EXPECT_EQ(field_of("[estimation]\npoints = 0::50\n"), "points");
  EXPECT_EQ(field_of("[estimation]\norder = 3\n"), "estimation.order");
  EXPECT_EQ(field_of("[estimation]\nl = 0\n"), "estimation.l");
  EXPECT_EQ(field_of("[bands]\nreplicates = 1\n"), "bands.replicates");
  EXPECT_EQ(field_of("[bands]\nprobs = 0.9, 0.1\n"), "bands.probs");
  EXPECT_EQ(field_of("[model]\nname = gaussian-wn\nrho = 1.5\n"), "model.rho");
  EXPECT_EQ(field_of("[model]\nname = cosine\nrho = 0.5\n"), "model.rho");
  EXPECT_EQ(field_of("[data]\nsource = csv\n"), "data.csv");
  EXPECT_EQ(field_of("[bands]\nmode = none\nreplicates = 0\n"), "none");
}

TEST(ConfigHash, IgnoresOutputOnly) {
  RunConfig a = small_config();
  RunConfig b = a;
  b.output = "elsewhere/record.json";
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(ConfigHash, ChangesWithEveryRelevantField) {
  const RunConfig base = small_config();
  const std::string h0 = config_hash(base);
  std::vector<std::function<void(RunConfig&)>> edits{
      [](RunConfig& c) { c.n += 1; },
      [](RunConfig& c) { c.model = GaussianWnParams{0.36}; },
      [](RunConfig& c) { c.model = CosineParams{}; },
      [](RunConfig& c) { c.k = 1, c.l = 0; },
      [](RunConfig& c) { c.points.push_back("10::10"); },
      [](RunConfig& c) { c.bandwidth.b2 = 0.61; },
      [](RunConfig& c) { c.truncation = 4; },
      [](RunConfig& c) { c.order = ApproxOrder::one; },
      [](RunConfig& c) { c.window = LagWindow::bartlett; },
      [](RunConfig& c) { c.grid = 34; },
      [](RunConfig& c) { c.bands = BandMode::bootstrap; },
      [](RunConfig& c) { c.replicates = 8; },
      [](RunConfig& c) { c.lower_prob = 0.1; },
      [](RunConfig& c) { c.upper_prob = 0.9; },
      [](RunConfig& c) { c.block_length = 50; },
      [](RunConfig& c) { c.seed = 8; },
  };
  for (std::size_t i = 0; i < edits.size(); ++i) {
    RunConfig c = base;
    edits[i](c);
    EXPECT_NE(config_hash(c), h0) << i;
  }
}

TEST(ConfigHash, CoversCsvContents) {
  const auto dir = scratch("hash_csv");
  const auto path = dir / "d.csv";
  { std::ofstream(path) << "a,b\n1,2\n3,4\n5,7\n"; }
  RunConfig c;
  c.source = DataKind::csv;
  c.csv = path;
  c.columns = {"a", "b"};
  c.bands = BandMode::bootstrap;
  const std::string h1 = config_hash(c);
  { std::ofstream(path) << "a,b\n1,2\n3,4\n5,8\n"; }
  EXPECT_NE(config_hash(c), h1);
}

TEST(FromJson, AppliesFieldsAndNamesErrors) {
  const RunConfig c = from_json(json::parse(R"({"points": ["10::10"], "bandwidth": [0.5, 0.4], "truncation": 5,
      "window": "parzen", "replicates": 10, "seed": 3, "model": {"name": "gaussian-wn", "rho": 0.2}})"));
  EXPECT_EQ(c.points, std::vector<std::string>{"10::10"});
  EXPECT_DOUBLE_EQ(c.bandwidth.b2, 0.4);
  EXPECT_EQ(c.truncation, 5);
  EXPECT_EQ(c.window, LagWindow::parzen);
  EXPECT_EQ(c.replicates, 10u);
  EXPECT_EQ(std::get<GaussianWnParams>(c.model).rho, 0.2);
  EXPECT_EQ(from_json(to_json(c)), c);

  auto field_of = [](const char* body) {
    try {
      from_json(json::parse(body));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of(R"({"points": ["10:10"]})"), "points");
  EXPECT_EQ(field_of(R"({"truncation": "x"})"), "truncation");
  EXPECT_EQ(field_of(R"({"bandwidth": [1, 2, 3]})"), "bandwidth");
  EXPECT_EQ(field_of(R"({"mode": "sometimes"})"), "mode");
  EXPECT_EQ(field_of(R"({"seed": -1})"), "seed");
}

TEST(ObservedSeries, ModelRealisationUsesDerivedSeed) {
  const RunConfig c = small_config();
  const PseudoNormalizedSeries z = observed_series(c);
  const PseudoNormalizedSeries expected = pseudo_normalize(simulate(c.model, c.n, derive_seed(c.seed, 0, 0)));
  EXPECT_EQ(z.values, expected.values);
}

TEST(ResultCache, PutGetAndNoTemporaries) {
  const auto dir = scratch("cache");
  ResultCache cache(dir);
  EXPECT_FALSE(cache.get("0123456789abcdef"));
  cache.put("0123456789abcdef", "{\"x\":1}");
  EXPECT_TRUE(cache.contains("0123456789abcdef"));
  EXPECT_EQ(*cache.get("0123456789abcdef"), "{\"x\":1}");
  EXPECT_THROW(cache.get("../etc"), std::invalid_argument);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(ResultCache, ConcurrentWritersNeverExposePartialRecords) {
  const auto dir = scratch("cache_concurrent");
  ResultCache cache(dir);
  const std::string a(200000, 'a'), b(200000, 'b');
  std::atomic<bool> bad{false};
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 20; ++i) cache.put("abcdef", t % 2 ? a : b);
      });
    }
    threads.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        if (auto r = cache.get("abcdef"); r && *r != a && *r != b) bad = true;
      }
    });
  }
  EXPECT_FALSE(bad);
  const std::string last = *cache.get("abcdef");
  EXPECT_TRUE(last == a || last == b);
}

TEST(RunRecord, ShapeAndCounters) {
  const RunConfig c = small_config();
  const json r = run_config(c);
  EXPECT_EQ(r["config_hash"], config_hash(c));
  EXPECT_EQ(r["omega"].size(), 33u);
  ASSERT_EQ(r["points"].size(), 2u);
  for (const auto& p : r["points"]) {
    EXPECT_EQ(p["replicates"]["total"], 7);
    EXPECT_EQ(p["correlations"].size(), 7u);
    for (const char* curve : {"co", "quad", "amplitude", "phase"}) {
      EXPECT_EQ(p["local"][curve]["median"].size(), 33u);
      EXPECT_EQ(p["global"][curve]["upper"].size(), 33u);
    }
  }
  EXPECT_EQ(r["convergence"]["fits"], 2 * 7 * (2 * 3 + 1));
  EXPECT_TRUE(r.contains("timing_ms"));
}

TEST(RunRecord, EstimateOnlyMode) {
  RunConfig c = small_config();
  c.bands = BandMode::none;
  const json r = run_config(c);
  const auto& co = r["points"][0]["local"]["co"];
  EXPECT_EQ(co["median"], co["lower"]);
  EXPECT_EQ(co["median"], co["upper"]);
  EXPECT_THROW(complex_summary(r, 0, 0.1), ConfigError);
}

TEST(RunRecord, ReplicatesRequireModel) {
  RunConfig c = small_config();
  c.source = DataKind::csv;
  c.csv = "x.csv";
  c.columns = {"a", "b"};
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Export, ByteIdenticalAcrossRunsAndSchema) {
  const RunConfig c = small_config();
  const auto d1 = scratch("export1"), d2 = scratch("export2");
  const auto f1 = export_csv(run_config(c), d1, "fig");
  const auto f2 = export_csv(run_config(c), d2, "fig");
  ASSERT_EQ(f1.size(), 8u);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(f1[i].filename(), f2[i].filename());
    EXPECT_EQ(slurp(f1[i]), slurp(f2[i])) << f1[i];
  }
  EXPECT_EQ(f1[0].filename(), "fig_50-50_co.csv");
  const std::string text = slurp(f1[0]);
  EXPECT_EQ(text.substr(0, text.find('\n')), "omega,local_median,local_lo,local_hi,global_median,global_lo,global_hi");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 34);
}

TEST(Export, ValuesMatchRecord) {
  const RunConfig c = small_config();
  const json r = run_config(c);
  const auto files = export_csv(r, scratch("export_values"), "v");
  std::istringstream in(slurp(files[1]));  // 50::50 quad
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    std::vector<double> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(std::stod(cell));
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[0], r["omega"][i].get<double>());
    EXPECT_EQ(cells[1], r["points"][0]["local"]["quad"]["median"][i].get<double>());
    EXPECT_EQ(cells[6], r["points"][0]["global"]["quad"]["upper"][i].get<double>());
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, std::numbers::pi, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.35), "0.35");
}

TEST(ComplexSummary, SnapsToGridAndUsesAllReplicates) {
  const RunConfig c = small_config();
  const json r = run_config(c);
  const json s = complex_summary(r, 0, 0.3);
  const FrequencyGrid g = FrequencyGrid::uniform(33);
  EXPECT_EQ(s["omega"].get<double>(), g[g.nearest(0.3)]);
  EXPECT_EQ(s["global"]["points"].size(), 7u);
  const std::size_t used = r["points"][0]["replicates"]["used"];
  EXPECT_EQ(s["local"]["points"].size(), used);
  EXPECT_THROW(complex_summary(r, 5, 0.3), ConfigError);
}

TEST(ComplexSummary, MatchesBandMediansAtGridPoint) {
  const RunConfig c = small_config();
  const json r = run_config(c);
  const json s = complex_summary(r, 1, 0.25);
  const FrequencyGrid g = FrequencyGrid::uniform(33);
  const auto j = static_cast<std::size_t>(g.nearest(0.25));
  EXPECT_NEAR(s["global"]["real"]["median"].get<double>(), r["points"][1]["global"]["co"]["median"][j].get<double>(),
              1e-12);
  EXPECT_NEAR(-s["global"]["imag"]["median"].get<double>(),
              r["points"][1]["global"]["quad"]["median"][j].get<double>(), 1e-12);
}

TEST(Figures, AllPresetsValidate) {
  for (const auto& name : figure_names()) {
    const RunConfig c = figure_config(name);
    EXPECT_NO_THROW(validate(c)) << name;
    EXPECT_EQ(c.seed, 1u);
  }
  const RunConfig cosine = figure_config("cosine");
  EXPECT_DOUBLE_EQ(std::get<CosineParams>(cosine.model).alpha, 0.302);
  const RunConfig real = figure_config("real-data");
  EXPECT_TRUE(std::filesystem::exists(real.csv));
  EXPECT_EQ(real.bands, BandMode::bootstrap);
  EXPECT_EQ(real.block_length, 100);
  EXPECT_THROW(figure_config("fig-9"), ConfigError);
}
