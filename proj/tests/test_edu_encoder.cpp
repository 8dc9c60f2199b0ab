#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace rstcoh;

namespace {

struct ScalarSetup {
  ParameterBundle bundle;
  EduEncoderParams enc;
  WordVectors wv{1};
  std::map<std::string, double> table{{"alpha", 0.7}, {"beta", -1.3}, {"gamma", 2.1}};

  explicit ScalarSetup(std::uint64_t seed) {
    Rng rng(seed);
    enc = add_edu_encoder(bundle, 1, 1, rng);
    oracle::randomize(bundle, rng, 1.5);
    for (const auto& [k, v] : table) wv.set(k, {v});
  }
};

}  // namespace

TEST(EduEncoder, ParameterCountAtDefaultSize) {
  ParameterBundle b;
  Rng rng(1);
  auto enc = add_edu_encoder(b, 300, 100, rng);
  EXPECT_EQ(enc.cell.parameter_count(), 160400u);
  EXPECT_EQ(b.total_parameters(), 160400u);
  EXPECT_TRUE(b.find("edu.lstm.W").has_value());
}

TEST(EduEncoder, MatchesScalarOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScalarSetup s(seed);
    const std::vector<std::string> tokens{"alpha", "unknown", "gamma", "beta", "alpha"};
    std::vector<double> xs;
    for (const auto& t : tokens) xs.push_back(oracle::word(s.table, t));
    const auto [h, c] = oracle::ScalarLstm::from(s.bundle, s.enc.cell).run(xs);
    Tape tape(std::as_const(s.bundle));
    auto out = encode_edu(tape, tokens, s.wv, s.enc);
    EXPECT_NEAR(tape.value(out.h)[0], h, 1e-12);
    EXPECT_NEAR(tape.value(out.c)[0], c, 1e-12);
  }
}

TEST(EduEncoder, UnknownTokensReadAsZeroVectors) {
  ScalarSetup s(3);
  const auto [h, c] = oracle::ScalarLstm::from(s.bundle, s.enc.cell).run({0.0, 0.0});
  Tape tape(std::as_const(s.bundle));
  const std::vector<std::string> tokens{"zzz", "qqq"};
  auto out = encode_edu(tape, tokens, s.wv, s.enc);
  EXPECT_NEAR(tape.value(out.h)[0], h, 1e-15);
  EXPECT_NEAR(tape.value(out.c)[0], c, 1e-15);
}

TEST(EduEncoder, OrderMatters) {
  ScalarSetup s(4);
  Tape tape(std::as_const(s.bundle));
  const std::vector<std::string> ab{"alpha", "beta"}, ba{"beta", "alpha"};
  EXPECT_NE(tape.value(encode_edu(tape, ab, s.wv, s.enc).h)[0],
            tape.value(encode_edu(tape, ba, s.wv, s.enc).h)[0]);
}

TEST(EduEncoder, InputErrors) {
  ScalarSetup s(5);
  Tape tape(std::as_const(s.bundle));
  EXPECT_THROW(encode_edu(tape, std::span<const std::string>{}, s.wv, s.enc), ValidationError);
  WordVectors wide(2);
  const std::vector<std::string> tokens{"alpha"};
  EXPECT_THROW(encode_edu(tape, tokens, wide, s.enc), DimensionError);
}

TEST(EduEncoder, GradientsMatchFiniteDifferences) {
  ParameterBundle b;
  Rng rng(9);
  auto enc = add_edu_encoder(b, 4, 3, rng);
  auto head = add_affine(b, "head", 3, 3, rng);
  const auto wv = fixture::tiny_vectors(4, 2);
  const std::vector<std::string> tokens{"the", "claim", ".", "nobody"};
  auto loss = [&](Tape& tape) {
    auto s = encode_edu(tape, tokens, wv, enc);
    return tape.negative_log(tape.softmax(tape.affine(head.weights, head.bias, s.h)), 1);
  };
  {
    Tape tape(b);
    tape.backward(loss(tape));
  }
  std::vector<Tensor> analytic;
  for (std::size_t k = 0; k < b.size(); ++k) analytic.push_back(b.grad(ParamId{k}));
  auto res = oracle::finite_difference_check(b, analytic, [&] {
    Tape tape(std::as_const(b));
    return tape.value(loss(tape))[0];
  });
  EXPECT_EQ(res.checked, b.total_parameters());
  EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_parameter;
}
