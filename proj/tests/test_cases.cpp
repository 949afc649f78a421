#include <cmath>

#include <gtest/gtest.h>

#include "mclab/harness.hpp"
#include "mclab/pointwise.hpp"

using namespace mclab;

namespace {

std::string rejection(auto fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.constraint();
  }
  return "none";
}

const LambdaSpec kEndpoint{LambdaSpec::Kind::endpoint, 0.0};
const LambdaSpec kMinusL{LambdaSpec::Kind::minus_l, 0.0};

CorpusFamily bump(double w = 0.5) {
  CorpusFamily f;
  f.center = {0.1};
  f.width = w;
  return f;
}

}  // namespace

TEST(Cases, ExponentRanges) {
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 0, 1.0, 3.0, kMinusL, {}, 1.0); }), "p_range");
  EXPECT_NO_THROW(make_case(CaseName::theorem2, 1, 1, 0, 1.0, 3.0, kMinusL, 0.5, 1.0));
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 0, 2.0, 2.0, kMinusL, {}, 1.0); }), "q_range");
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 1, 2.0, 3.0, kMinusL, {}, 1.0); }), "case_orders");
  EXPECT_EQ(rejection([] { make_case(CaseName::frac_hom, 1, 1, 0, 2.0, 4.0, kEndpoint, 1.0, kInfinity); }),
            "sigma_range");
}

TEST(Cases, LambdaWindow) {
  const InequalityCase e = make_case(CaseName::theorem1, 1, 2, 1, 2.0, 4.0, kEndpoint, {}, 1.0);
  EXPECT_DOUBLE_EQ(e.lambda, (2.0 * 2.0 - 1.0 * 4.0) / 2.0);
  EXPECT_DOUBLE_EQ(make_case(CaseName::theorem1, 1, 2, 1, 2.0, 4.0, kMinusL, {}, 1.0).lambda, -1.0);
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, {LambdaSpec::Kind::value, 5.0}, {}, 1.0); }),
            "lambda_upper_bound");
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, {LambdaSpec::Kind::value, -0.5}, {}, 1.0); }),
            "lambda_lower_bound");
  EXPECT_EQ(rejection([] { make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, kMinusL, {}, kInfinity); }),
            "homogeneous_endpoint");
}

TEST(Cases, Normalisation) {
  const InequalityCase m = make_case(CaseName::morrey_hom, 1, 1, 0, 1.5, 4.0, kMinusL, {}, 0.5);
  EXPECT_TRUE(std::isinf(m.rho));
  EXPECT_DOUBLE_EQ(m.lambda, lambda_endpoint(m));
  const InequalityCase s = make_case(CaseName::sobolev_critical, 2, 1, 0, 1.5, 99.0, kMinusL, {}, 1.0);
  EXPECT_DOUBLE_EQ(s.q, 6.0);
  EXPECT_FALSE(make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, kMinusL, 0.5, 1.0).sigma.has_value());
  EXPECT_FALSE(std::signbit(make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, kMinusL, {}, 1.0).lambda));
}

TEST(Cases, LambdaSpecParse) {
  EXPECT_EQ(LambdaSpec::parse("-l").kind, LambdaSpec::Kind::minus_l);
  EXPECT_EQ(LambdaSpec::parse("endpoint").kind, LambdaSpec::Kind::endpoint);
  EXPECT_DOUBLE_EQ(LambdaSpec::parse(0.25).value, 0.25);
  EXPECT_DOUBLE_EQ(LambdaSpec::parse("0.5").value, 0.5);
  EXPECT_THROW(LambdaSpec::parse("half"), ValidationError);
  EXPECT_THROW(LambdaSpec::parse(nlohmann::json::array()), ValidationError);
}

TEST(Cases, MatrixParsingIsStrict) {
  EXPECT_THROW(matrix_from_json({{"cases", {"theorem1"}}, {"bogus", 1}}), ValidationError);
  EXPECT_THROW(matrix_from_json({{"cases", {"nope"}}}), ValidationError);
  EXPECT_THROW(matrix_from_json({{"orders", {{1, 0, 2}}}}), ValidationError);
  EXPECT_THROW(matrix_from_json({{"p", nlohmann::json::array()}}), ValidationError);
  EXPECT_THROW(matrix_from_json({{"rho", {-1.0}}}), ValidationError);
  const TestMatrix m = matrix_from_json({{"rho", {1.0, "inf"}}});
  EXPECT_TRUE(std::isinf(m.rho[1]));
  EXPECT_EQ(m.cases.size(), all_case_names().size());
}

TEST(Cases, ExpandRecordsSkipsAndDeduplicates) {
  TestMatrix m;
  m.cases = {CaseName::theorem1, CaseName::morrey_hom};
  m.orders = {{1, 0}};
  m.p = {1.0, 1.5};
  m.q = {4.0};
  const Expansion e = expand(m, 1);
  // morrey_hom collapses every λ and ρ onto a single case per p.
  std::size_t hom = 0;
  for (const auto& c : e.cases) hom += c.name == CaseName::morrey_hom;
  EXPECT_EQ(hom, 1u);
  bool p_skip = false;
  for (const auto& s : e.skipped) p_skip |= s.constraint == "p_range";
  EXPECT_TRUE(p_skip);
  for (const auto& c : e.cases) EXPECT_NO_THROW(validate_case(c));
  EXPECT_EQ(case_key(expand(m, 1).cases.front()), case_key(e.cases.front()));
}

TEST(Harness, ZeroFunctionHasZeroRatio) {
  const Domain d = Domain::make(1, 256, 4.0, 0.5);
  FunctionAnalysis a(GridFunction::zeros(d));
  const Expansion e = expand(TestMatrix::defaults(), 1);
  ASSERT_FALSE(e.cases.empty());
  for (const auto& c : e.cases) {
    const RatioReport r = evaluate_case(c, a, "zero");
    EXPECT_EQ(r.ratio, 0.0) << case_key(c);
    EXPECT_FALSE(r.violation);
  }
}

TEST(Harness, CorpusIsDeterministic) {
  const Domain d = Domain::make(1, 256, 4.0, 0.5);
  const auto a = generate_corpus(default_corpus(1), d, 7);
  const auto b = generate_corpus(default_corpus(1), d, 7);
  const auto c = generate_corpus(default_corpus(1), d, 8);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sha256, b[i].sha256);
    EXPECT_EQ(a[i].sha256.size(), 64u);
    differs |= a[i].sha256 != c[i].sha256;
  }
  EXPECT_TRUE(differs);
  std::vector<CorpusEntry> dup{{"x", bump()}, {"x", bump(0.4)}};
  EXPECT_EQ(rejection([&] { generate_corpus(dup, d, 1); }), "corpus_id");
}

TEST(Harness, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Harness, SingleScaleIsFlat) {
  const Domain d = Domain::make(1, 256, 4.0, 0.5);
  const InequalityCase c = make_case(CaseName::morrey_hom, 1, 1, 0, 1.5, 4.0, kEndpoint, {}, kInfinity);
  const ScalingTable t = scaling_study(c, bump(), d, {1.0}, {});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(t.flatness, 1.0);
  const ScalingTable far = scaling_study(c, bump(), d, {1.0, 20.0}, {});
  EXPECT_EQ(far.rows.size(), 1u);
  ASSERT_EQ(far.skipped.size(), 1u);
  EXPECT_EQ(far.skipped[0].first, 20.0);
}

TEST(Harness, ZeroRefinementHasNoDrift) {
  const Domain d = Domain::make(1, 64, 4.0, 0.5);
  CorpusFamily c;
  c.kind = FamilyKind::zero;
  const InequalityCase t = make_case(CaseName::theorem1, 1, 1, 0, 2.0, 4.0, kMinusL, {}, 1.0);
  const RefinementTable r = refinement_study(t, c, d, {64, 128}, {});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.drift, 0.0);
  EXPECT_NEAR(relative_drift(1.0, 1.1), 0.1 / 1.1, 1e-15);
  EXPECT_EQ(relative_drift(0.0, 0.0), 0.0);
}

TEST(Pointwise, BetaAtEndpointIsExactlyZero) {
  for (auto [k, l] : {std::pair{1, 0}, {2, 1}, {2, 0}})
    for (double p : {1.5, 2.0})
      for (double q : {3.0, 4.0}) {
        const InequalityCase c = make_case(CaseName::theorem2, 1, k, l, p, q, kEndpoint, 0.5, 1.0);
        EXPECT_EQ(interpolation_exponents(c).beta, 0.0);
        const InterpolationExponents e = interpolation_exponents(c);
        EXPECT_NEAR(e.a + e.b, 1.0, 1e-12);
      }
  const InequalityCase f = make_case(CaseName::frac_hom, 1, 1, 0, 1.5, 4.0, kEndpoint, 0.5, kInfinity);
  EXPECT_EQ(interpolation_exponents(f).beta, 0.0);
}

TEST(Pointwise, BetaInsideWindow) {
  const InequalityCase c = make_case(CaseName::theorem1, 1, 2, 1, 2.0, 4.0, kMinusL, {}, 1.0);
  const InterpolationExponents e = interpolation_exponents(c);
  EXPECT_DOUBLE_EQ(e.beta, 2.0 * (2.0 - 1.0) / 4.0 + 1.0 - 1.0);
  EXPECT_GE(e.beta, -c.lambda - c.l);
  EXPECT_LE(e.beta, c.k - c.l);
}

TEST(Pointwise, ZeroAndLocallyConstant) {
  const Domain d = Domain::make(1, 128, 4.0, 0.5);
  FunctionAnalysis z(GridFunction::zeros(d));
  const Index x{64, 0};
  EXPECT_EQ(lemma_ratio(z, 1, 0, x, 0.5).ratio, 0.0);
  EXPECT_EQ(fractional_lemma_ratio(z, 1, 0, x, 0.5).ratio, 0.0);
  // Constant near x: the potential term vanishes and the average equals |u(x)|.
  CorpusFamily p;
  p.kind = FamilyKind::smooth_plateau;
  p.center = {0.0};
  p.inner_radius = 1.0;
  p.outer_radius = 2.0;
  FunctionAnalysis a(sample(d, p));
  for (int k : {1, 2}) {
    const PointwiseReport r = lemma_ratio(a, k, 0, x, 0.5);
    EXPECT_EQ(r.rhs_terms[0].second, 0.0);
    EXPECT_NEAR(r.ratio, 1.0, 1e-14);
  }
}

TEST(Pointwise, SamplePointsAreDeterministic) {
  const Domain d = Domain::make(1, 256, 4.0, 0.5);
  const GridFunction u = sample(d, bump());
  const auto a = sample_points(u, 50, 9), b = sample_points(u, 50, 9), c = sample_points(u, 50, 10);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& x : a) EXPECT_NE(u.at(x), 0.0);
}
