#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "errmax/dataset.hpp"
#include "test_support.hpp"

namespace errmax {
namespace {

using testing::expect_error;
using testing::TempDir;

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

// Two-sided Kolmogorov-Smirnov statistic against U(0, 1).
double ks_uniform(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        d = std::max({d, (static_cast<double>(i) + 1) / n - v[i], v[i] - static_cast<double>(i) / n});
    }
    return d;
}

TEST(Normalizer, RoundTripAndValidation) {
    const Normalizer n({{1.01, 2.0}, {0.5, 1.5}, {0.0, 0.1}});
    const Eigen::Vector3d raw(1.37, 0.81, 0.042);
    const Eigen::VectorXd back = n.denormalize(n.normalize(raw));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back(i), raw(i), 1e-12 * std::abs(raw(i)));
    EXPECT_DOUBLE_EQ(n.normalize(raw)(1), 0.31);
    expect_error(ErrorKind::InvalidSpec, [] { Normalizer({{1.0, 1.0}}); });
    expect_error(ErrorKind::Shape, [&] { (void)n.normalize(Eigen::Vector2d(0, 0)); });
}

TEST(Provenance, TagsRoundTrip) {
    EXPECT_EQ(Provenance::uniform().str(), "uniform");
    EXPECT_EQ(Provenance::mined(3).str(), "mined-round-3");
    EXPECT_EQ(Provenance::parse("mined-round-12"), Provenance::mined(12));
    EXPECT_EQ(Provenance::parse("uniform"), Provenance::uniform());
    expect_error(ErrorKind::Parse, [] { (void)Provenance::parse("mined-round-x"); });
    expect_error(ErrorKind::Parse, [] { (void)Provenance::parse("mined"); });
}

TEST(SampleUniform, ValidDeterministicAndInUnitBox) {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet a = sample_uniform(z, 2000, 5);
    const LabeledSet b = sample_uniform(z, 2000, 5);
    const LabeledSet c = sample_uniform(z, 2000, 6);
    EXPECT_EQ(a.size(), 2000u);
    EXPECT_FALSE(a.is_labeled());
    EXPECT_EQ(a.inputs, b.inputs);
    EXPECT_NE(a.inputs, c.inputs);
    EXPECT_GE(a.inputs.minCoeff(), 0.0);
    EXPECT_LE(a.inputs.maxCoeff(), 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(z.valid(a.raw_input(i)));
        EXPECT_TRUE(a.provenance[i].is_uniform());
    }
}

TEST(SampleUniform, UnconstrainedMarginalsAreUniform) {
    // tau, sigma and rate do not enter the validity predicate, so their
    // accepted marginals stay uniform. KS critical value at the 1% level.
    const LabeledSet s = sample_uniform(make_barrier_oracle(), 5000, 21);
    const double crit = 1.63 / std::sqrt(5000.0);
    for (int j : {2, 3, 4}) {
        std::vector<double> col(s.inputs.col(j).data(), s.inputs.col(j).data() + s.size());
        EXPECT_LT(ks_uniform(col), crit) << "dimension " << j;
    }
}

TEST(SampleUniform, StarvationWhenNothingIsValid) {
    OracleSpec z = make_synthetic_oracle(SyntheticKind::Constant);
    z.is_valid = [](std::span<const double>) { return false; };
    expect_error(ErrorKind::SamplingStarvation, [&] { (void)sample_uniform(z, 10, 1); });
    expect_error(ErrorKind::Domain, [&] { (void)sample_uniform(make_barrier_oracle(), 0, 1); });
}

TEST(Label, TargetsMatchOracleAndIgnoreThreads) {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet s = sample_uniform(z, 300, 2);
    const LabeledSet one = label(s, z, 1);
    const LabeledSet four = label(s, z, 4);
    ASSERT_TRUE(one.is_labeled());
    EXPECT_EQ(one.targets, four.targets);
    for (std::size_t i = 0; i < s.size(); i += 37) {
        EXPECT_EQ(one.targets(static_cast<Eigen::Index>(i)), z(s.raw_input(i)));
    }
}

TEST(Label, FailureCarriesSampleIndex) {
    SyntheticParams p;
    p.dim = 1;
    OracleSpec z = make_synthetic_oracle(SyntheticKind::Constant, p);
    LabeledSet s = empty_set(z, "s");
    s.inputs = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    s.provenance.assign(5, Provenance::uniform());
    z.evaluate = [](std::span<const double> x) { return x[0] > 0.6 && x[0] < 0.8 ? NAN : 1.0; };
    try {
        (void)label(s, z, 1);
        FAIL() << "expected a labelling error";
    } catch (const LabelingError& e) {
        EXPECT_EQ(e.index(), 3u);
    }
}

TEST(Merge, ConcatenatesAndChecksCompatibility) {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet a = label(sample_uniform(z, 10, 1, "a"), z);
    LabeledSet b = label(sample_uniform(z, 4, 2, "b"), z);
    b.provenance.assign(4, Provenance::mined(0));
    const LabeledSet m = merge(a, b, "ab");
    EXPECT_EQ(m.name, "ab");
    ASSERT_EQ(m.size(), 14u);
    EXPECT_EQ(m.inputs.bottomRows(4), b.inputs);
    EXPECT_EQ(m.targets.head(10), a.targets);
    EXPECT_EQ(m.provenance[12], Provenance::mined(0));

    const LabeledSet unlabeled = sample_uniform(z, 3, 3);
    expect_error(ErrorKind::IncompatibleSets, [&] { (void)merge(a, unlabeled); });
    auto d = default_barrier_domain();
    d[4].hi = 0.2;
    const OracleSpec other = make_barrier_oracle(d);
    expect_error(ErrorKind::IncompatibleSets, [&] { (void)merge(a, label(sample_uniform(other, 3, 3), other)); });
}

TEST(Subset, PicksRowsInGivenOrder) {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet a = label(sample_uniform(z, 10, 1), z);
    const std::vector<std::size_t> idx{7, 2, 2};
    const LabeledSet s = subset(a, idx, "picked");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.inputs.row(0), a.inputs.row(7));
    EXPECT_EQ(s.targets(2), a.targets(2));
    const std::vector<std::size_t> bad{10};
    expect_error(ErrorKind::Shape, [&] { (void)subset(a, bad); });
}

TEST(Csv, LabeledRoundTripIsBitExact) {
    TempDir dir("csv");
    const OracleSpec z = make_barrier_oracle();
    LabeledSet a = label(sample_uniform(z, 50, 4, "S0"), z);
    a.provenance[7] = Provenance::mined(2);
    save_csv(a, dir / "a.csv");
    const LabeledSet b = load_csv(dir / "a.csv");
    EXPECT_EQ(b.name, "S0");
    EXPECT_EQ(b.dim_names, a.dim_names);
    EXPECT_EQ(b.dim_units, a.dim_units);
    EXPECT_EQ(b.target_units, "dollars");
    EXPECT_EQ(b.normalizer, a.normalizer);
    EXPECT_EQ(b.inputs, a.inputs);
    EXPECT_EQ(b.targets, a.targets);
    EXPECT_EQ(b.provenance, a.provenance);
    save_csv(b, dir / "b.csv");
    EXPECT_EQ(read_text(dir / "a.csv"), read_text(dir / "b.csv"));
}

TEST(Csv, HeaderLayout) {
    TempDir dir("csv_hdr");
    const OracleSpec z = make_synthetic_oracle(SyntheticKind::QuadraticBowl);
    save_csv(label(sample_uniform(z, 1, 1, "tiny"), z), dir / "t.csv");
    const std::string text = read_text(dir / "t.csv");
    EXPECT_EQ(text.rfind("#errmax-labeled-set v1\n#name=tiny\n#dim_names=x0,x1\n", 0), 0u);
    EXPECT_NE(text.find("#normalizer lo=0,0 hi=1,1\ndim_0,dim_1,target,provenance\n"), std::string::npos);
}

TEST(Csv, UnlabeledAndEmptySetsRoundTrip) {
    TempDir dir("csv_unl");
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet u = sample_uniform(z, 5, 1);
    save_csv(u, dir / "u.csv");
    const LabeledSet u2 = load_csv(dir / "u.csv");
    EXPECT_FALSE(u2.is_labeled());
    EXPECT_EQ(u2.inputs, u.inputs);

    save_csv(empty_set(z, "M0"), dir / "e.csv");
    const LabeledSet e = load_csv(dir / "e.csv");
    EXPECT_TRUE(e.empty());
    EXPECT_EQ(e.dim(), 5u);
    EXPECT_EQ(e.normalizer, z.normalizer());
}

TEST(Csv, ParseErrorsReportLineNumbers) {
    TempDir dir("csv_bad");
    const OracleSpec z = make_synthetic_oracle(SyntheticKind::QuadraticBowl);
    save_csv(label(sample_uniform(z, 3, 1), z), dir / "good.csv");
    const std::string good = read_text(dir / "good.csv");

    auto expect_line = [&](const std::string& text, std::size_t line) {
        write_text(dir / "bad.csv", text);
        try {
            (void)load_csv(dir / "bad.csv");
            ADD_FAILURE() << "expected a parse error";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), line) << e.what();
        }
    };
    expect_line("not a marker\n", 1);
    std::string text = good;
    // first data row is line 8; corrupt its first number
    const auto row8 = text.find("\n", text.find("provenance\n")) + 1;
    text.replace(row8, 1, "x");
    expect_line(text, 8);
    expect_line(good + "0.5,0.5\n", 11);
    expect_line(good + "0.5,0.5,1,martian\n", 11);
    expect_error(ErrorKind::Io, [&] { (void)load_csv(dir / "missing.csv"); });
}

}  // namespace
}  // namespace errmax
