#include "landau/config.hpp"
#include "landau/io.hpp"
#include "landau/report.hpp"
#include "landau/verify.hpp"

#include <gtest/gtest.h>

using namespace landau;
using namespace landau::report;
namespace fs = std::filesystem;

namespace {

std::vector<MomentRecord> decaying_series(int count) {
  std::vector<MomentRecord> s;
  for (int k = 0; k < count; ++k) {
    MomentRecord r;
    r.t = 0.1 * k;
    r.mass = 1.0;
    r.energy = 1.5;
    r.entropy = -4.0 - 0.01 * k;
    r.fisher = 6.0 * std::exp(-0.2 * k);
    s.push_back(r);
  }
  return s;
}

// Captures warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> seen;
  std::function<void(const std::string&)> saved = warning_sink();
  WarningCapture() {
    warning_sink() = [this](const std::string& m) { seen.push_back(m); };
  }
  ~WarningCapture() { warning_sink() = saved; }
};

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("landau_report_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Verdict, PassIffObservedWithinBoundPlusTolerance) {
  EXPECT_TRUE(make_verdict("x", 1.0, 1.0, 0.0).pass);
  EXPECT_TRUE(make_verdict("x", 1.1, 1.0, 0.1).pass);
  EXPECT_FALSE(make_verdict("x", 1.2, 1.0, 0.1).pass);
  EXPECT_FALSE(make_verdict("x", std::numeric_limits<double>::quiet_NaN(), 1.0, 0.1).pass);
}

TEST(Monotonicity, DecreasingSeriesPasses) {
  const auto vs = monotonicity_verdict(decaying_series(6));
  EXPECT_EQ(vs.size(), 2u * 5u + 3u);
  EXPECT_TRUE(all_pass(vs));
}

TEST(Monotonicity, SingleFisherUptickFailsThatPairOnly) {
  auto s = decaying_series(6);
  s[3].fisher = s[2].fisher * (1.0 + 2e-6);
  const auto vs = monotonicity_verdict(s);
  EXPECT_FALSE(all_pass(vs));
  for (const auto& v : vs) EXPECT_EQ(v.pass, v.name != "fisher[3]") << v.name;
}

TEST(Monotonicity, ConstantMaxwellianSeriesPassesWithZeroObserved) {
  const kinetic::Density f = kinetic::maxwellian(kinetic::VelocityGrid(16, 6.5), 1.0, Vec3::Zero(), 1.0);
  std::vector<MomentRecord> s;
  for (int k = 0; k < 4; ++k) s.push_back(kinetic::moments(f, 0.5 * k));
  const auto vs = monotonicity_verdict(s);
  EXPECT_TRUE(all_pass(vs));
  for (const auto& v : vs) EXPECT_EQ(v.observed, 0.0) << v.name;
}

TEST(Monotonicity, DriftVerdicts) {
  auto s = decaying_series(3);
  s[2].mass = 1.0 + 5e-10;
  s[1].energy = 1.5 * (1.0 + 2e-3);
  const auto vs = monotonicity_verdict(s);
  for (const auto& v : vs) {
    if (v.name == "mass_drift") {
      EXPECT_FALSE(v.pass);
      EXPECT_NEAR(v.observed, 5e-10, 1e-15);
    }
    if (v.name == "energy_drift") EXPECT_FALSE(v.pass);
    if (v.name == "momentum_drift") EXPECT_TRUE(v.pass);
  }
}

TEST(Monotonicity, RejectsShortOrUnsortedSeries) {
  EXPECT_THROW(monotonicity_verdict(decaying_series(1)), ConfigError);
  auto s = decaying_series(4);
  std::swap(s[1], s[2]);
  EXPECT_THROW(monotonicity_verdict(s), ConfigError);
}

TEST(Csv, RoundTripIsExact) {
  auto s = decaying_series(5);
  s[2].momentum = Vec3(1e-17, -3.25, 1.0 / 3.0);
  s[4].entropy = -4.123456789012345678;
  std::stringstream ss;
  write_csv(ss, s);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "t,mass,px,py,pz,energy,entropy,fisher");
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(back[k].t, s[k].t);
    EXPECT_EQ(back[k].momentum, s[k].momentum);
    EXPECT_EQ(back[k].entropy, s[k].entropy);
    EXPECT_EQ(back[k].fisher, s[k].fisher);
  }
}

TEST(Csv, RejectsWrongHeaderAndMalformedRows) {
  std::stringstream a("t,mass,energy\n0,1,2\n");
  EXPECT_THROW(read_csv(a), ConfigError);
  std::stringstream b("t,mass,px,py,pz,energy,entropy,fisher\n0,1,0,0,0,1.5,-4\n");
  EXPECT_THROW(read_csv(b), ConfigError);
  std::stringstream c("t,mass,px,py,pz,energy,entropy,fisher\n0,1,0,0,0,1.5,-4,x\n");
  EXPECT_THROW(read_csv(c), ConfigError);
}

TEST(Csv, VerdictJsonIsByteStable) {
  std::stringstream ss;
  write_csv(ss, decaying_series(7));
  const std::string text = ss.str();
  std::stringstream a(text), b(text);
  EXPECT_EQ(to_json(monotonicity_verdict(read_csv(a))).dump(2), to_json(monotonicity_verdict(read_csv(b))).dump(2));
}

TEST(Convergence, RecoversSyntheticOrder) {
  std::vector<ConvergencePoint> pts;
  for (int n : {16, 24, 32}) pts.push_back({n, 1.0 / n, 3.0 * std::pow(1.0 / n, 2.0)});
  const ConvergenceTable t = convergence_table(pts);
  EXPECT_NEAR(t.order, 2.0, 1e-12);
  EXPECT_FALSE(t.degenerate);
  ASSERT_TRUE(t.rows[1].local_order.has_value());
  EXPECT_NEAR(*t.rows[2].local_order, 2.0, 1e-12);
}

TEST(Convergence, IdenticalRunsWarnDegenerate) {
  WarningCapture w;
  const ConvergenceTable t = convergence_table({{16, 0.1, 1e-3}, {24, 0.05, 1e-3}, {32, 0.025, 1e-3}});
  EXPECT_TRUE(t.degenerate);
  EXPECT_EQ(t.order, 0.0);
  EXPECT_EQ(w.seen.size(), 1u);
}

TEST(Convergence, NeedsThreePoints) {
  EXPECT_THROW(convergence_table({{16, 0.1, 1e-3}, {32, 0.05, 2e-4}}), ConfigError);
}

TEST(Convergence, LemmaMetricIsSecondOrder) {
  const verify::LemmaStudy s = verify::lemma_study(Potential(-3.0), {0.1, 0.05, 0.025});
  for (const auto& row : s.errors) {
    const ConvergenceTable t =
        convergence_table({{0, s.steps[0], row[0]}, {0, s.steps[1], row[1]}, {0, s.steps[2], row[2]}});
    EXPECT_NEAR(t.order, 2.0, 0.4);
  }
}

TEST(Convergence, MarginalDefectMetricIsSecondOrderAtCoulomb) {
  std::vector<ConvergencePoint> pts;
  for (int n : {16, 24, 32}) {
    const kinetic::Density f = kinetic::bimodal(kinetic::VelocityGrid(n, 6.5));
    pts.push_back({n, f.grid.h(), lifted::marginal_defect(f, Potential(-3.0))});
  }
  EXPECT_NEAR(convergence_table(pts).order, 2.0, 0.4);
}

TEST(Config, DefaultsNestedAndDottedKeys) {
  const auto a = config::parse(nlohmann::ordered_json::parse(R"({"grid": {"n": 24}, "potential.gamma": -2})"));
  EXPECT_EQ(a.solver.n, 24);
  EXPECT_EQ(a.solver.gamma, -2.0);
  EXPECT_EQ(a.solver.half_width, 6.5);
  EXPECT_FALSE(a.solver.dt.has_value());
  EXPECT_EQ(a.init.kind, config::InitKind::bimodal);
  EXPECT_EQ(a.solver.potential().coupling(), 1.0);
  const auto b = config::parse(nlohmann::ordered_json::parse(R"({"potential": {"gamma": -3}})"));
  EXPECT_DOUBLE_EQ(b.solver.potential().coupling(), 1.0 / (8.0 * std::numbers::pi));
}

TEST(Config, RejectsUnknownDuplicateAndMistypedKeys) {
  using nlohmann::ordered_json;
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"grid": {"m": 3}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"grid": {"n": 16}, "grid.n": 16})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"grid": {"n": "16"}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"time": {"dt": -1}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"init": {"kind": "uniform"}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"init": {"kind": "maxwellian", "offset": 1}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"([1, 2])")), ConfigError);
}

TEST(Config, GammaRangeAndAdmissibilityWarning) {
  using nlohmann::ordered_json;
  WarningCapture w;
  config::parse(ordered_json::parse(R"({"potential": {"gamma": -4.5}})"));
  EXPECT_TRUE(w.seen.empty());
  config::parse(ordered_json::parse(R"({"potential": {"gamma": -5.5}})"));
  ASSERT_EQ(w.seen.size(), 1u);
  EXPECT_NE(w.seen[0].find("sqrt(22)"), std::string::npos);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"potential": {"gamma": -5.8}})")), ConfigError);
  EXPECT_THROW(config::parse(ordered_json::parse(R"({"potential": {"gamma": 5.8}})")), ConfigError);
}

TEST(Config, MissingFileIsAConfigError) {
  EXPECT_THROW(config::load("/nonexistent/landau.json"), ConfigError);
}

TEST(Io, AtomicWriteLeavesOnlyTheTarget) {
  const fs::path dir = scratch_dir("atomic");
  io::atomic_write(dir / "a.txt", "first");
  io::atomic_write(dir / "a.txt", "second");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "second");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
}

TEST(Io, SnapshotRoundTripAndFileInitRelativeToConfig) {
  const fs::path dir = scratch_dir("snapshot");
  const kinetic::VelocityGrid g(8, 8.0);
  const kinetic::Density f = kinetic::maxwellian(g, 1.0, Vec3(0.1, 0, 0), 1.0);
  io::write_snapshot(dir / "data" / "f.bin", f, 0.25, Potential(-3.0));
  EXPECT_EQ(fs::file_size(dir / "data" / "f.bin"), g.size() * 8);
  io::SnapshotMeta meta;
  EXPECT_EQ(io::read_snapshot(dir / "data" / "f.bin", &meta).values, f.values);
  EXPECT_EQ(meta.n, 8);
  EXPECT_EQ(meta.t, 0.25);
  EXPECT_DOUBLE_EQ(meta.coupling, 1.0 / (8.0 * std::numbers::pi));

  // The first byte is the low byte of the first value.
  const std::string raw = io::read_file(dir / "data" / "f.bin");
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(raw[b]);
  EXPECT_EQ(std::bit_cast<double>(bits), f.values[0]);

  io::write_json(dir / "cfg.json", nlohmann::ordered_json::parse(
                                        R"({"grid": {"n": 8, "half_width": 8.0}, "init": {"kind": "file", "path": "data/f.bin"}})"));
  const auto cfg = config::load(dir / "cfg.json");
  EXPECT_EQ(config::initial_density(cfg).values, f.values);

  io::write_json(dir / "cfg2.json", nlohmann::ordered_json::parse(
                                         R"({"grid": {"n": 16, "half_width": 8.0}, "init": {"kind": "file", "path": "data/f.bin"}})"));
  EXPECT_THROW(config::initial_density(config::load(dir / "cfg2.json")), ConfigError);
}

TEST(Io, FieldJsonRoundTrip) {
  sphere::Spectrum c(4);
  c(0, 0) = {1.5, 0.0};
  c(2, 1) = {0.25, -0.5};
  c(2, -1) = {-0.25, -0.5};
  const auto j = io::field_to_json(c, true);
  EXPECT_EQ(j["bandlimit"], 4);
  EXPECT_EQ(j["coefficients"].size(), 3u);
  const io::FieldFile back = io::field_from_json(j);
  EXPECT_TRUE(back.log);
  EXPECT_EQ(back.coeffs.data(), c.data());
  EXPECT_THROW(io::field_from_json(nlohmann::ordered_json::parse(R"({"bandlimit": 2, "coefficients": [[3, 0, 1, 0]]})")),
               ConfigError);
  EXPECT_THROW(io::field_from_json(nlohmann::ordered_json::parse(R"({"coefficients": []})")), ConfigError);
}
