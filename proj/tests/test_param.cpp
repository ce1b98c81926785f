#include <gtest/gtest.h>

#include <vector>

#include "novograd/param.hpp"

using namespace novograd;

TEST(L2NormSq, Examples) {
  EXPECT_EQ(l2_norm_sq<double>(std::vector<double>{3, 4}), 25.0);
  EXPECT_EQ(l2_norm_sq<double>(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(l2_norm_sq<double>(std::vector<double>{1, 1, 1, 1}), 4.0);
  EXPECT_EQ(l2_norm<double>(std::vector<double>{3, 4}), 5.0);
}

TEST(L2NormSq, EmptyIsError) {
  try {
    l2_norm_sq<double>(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty layer");
  }
}

TEST(L2NormSq, Float) { EXPECT_EQ(l2_norm_sq<float>(std::vector<float>{3, 4}), 25.0f); }

TEST(ModelParams, LayoutAndLookup) {
  ModelParams<double> p;
  p.add("W1", {1, 2, 3});
  p.add("b1", {0});
  EXPECT_EQ(p.num_layers(), 2u);
  EXPECT_EQ(p.total_elements(), 4u);
  EXPECT_EQ(p.at("b1").size(), 1u);
  EXPECT_EQ(p.find("nope"), nullptr);
  EXPECT_THROW(p.add("W1", {1}), Error);
  EXPECT_THROW(p.at("nope"), Error);
}

TEST(ModelParams, LayerShapeIsFixed) {
  ParameterLayer<double> layer("w", {1, 2});
  EXPECT_EQ(layer.grad().size(), 2u);
  EXPECT_EQ(layer.grad()[0], 0.0);
}

TEST(ZeroGrads, Examples) {
  ModelParams<double> p;
  p.add("a", {5});
  p.add("b", {1, 1});
  p[0].grad()[0] = 7;
  p[1].grad()[0] = 1;
  p[1].grad()[1] = 2;
  zero_grads(p);
  EXPECT_EQ(p[0].grad()[0], 0.0);
  EXPECT_EQ(p[1].grad()[0], 0.0);
  EXPECT_EQ(p[1].grad()[1], 0.0);
  EXPECT_EQ(p[0].weights()[0], 5.0);
  zero_grads(p);
  EXPECT_EQ(p[1].grad()[1], 0.0);
}

TEST(StateReport, Examples) {
  EXPECT_EQ(state_report(Algorithm::adam, 1000, 4).total_state_elements, 2000u);
  EXPECT_EQ(state_report(Algorithm::novograd, 1000, 4).total_state_elements, 1004u);
  EXPECT_EQ(state_report(Algorithm::novograd_ams, 1000, 4).total_state_elements, 1008u);
  EXPECT_EQ(state_report(Algorithm::sgd_momentum, 1000, 4).total_state_elements, 1000u);
  EXPECT_EQ(state_report(Algorithm::sngd, 1000, 4).total_state_elements, 0u);
}

TEST(StateReport, FromParams) {
  ModelParams<double> p;
  p.add("a", std::vector<double>(10));
  p.add("b", std::vector<double>(3));
  const auto r = state_report(Algorithm::novograd, p);
  EXPECT_EQ(r.full_vectors, 1u);
  EXPECT_EQ(r.per_layer_scalars, 1u);
  EXPECT_EQ(r.total_state_elements, 15u);
}
