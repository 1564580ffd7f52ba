/*
 * Copyright 2026 The djack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "djack/artifact.h"
#include "djack/error.h"
#include "djack/jackknife.h"
#include "djack/rng.h"

namespace djack {
namespace {

namespace fs = std::filesystem;

LooEnsemble sample_ensemble(bool scaled) {
  LooEnsemble e;
  e.spec.input_dim = 2;
  e.spec.hidden_layers = {3, 2};
  e.spec.activation = Activation::kRelu;
  e.spec.l2_penalty = 1.0 / 3.0;
  const Index p = Network(e.spec).param_count();
  Rng rng(5);
  auto draw = [&](Index len) {
    Vector v(len);
    for (Index k = 0; k < len; ++k) v(k) = rng.normal() * 1e-3 + 1.0 / 7.0;
    return v;
  };
  e.base = draw(p);
  for (int i = 0; i < 6; ++i) {
    e.loo_params.push_back(draw(p));
    e.residuals.push_back(std::abs(rng.normal()) / 3.0);
  }
  e.order = 1;
  e.mode = SecondOrderMode::kMainText;
  e.signs = SignConvention::kAlgorithm1;
  e.inverse_mode = InverseHvpMode::kStochasticNeumann;
  e.damping = 0.1;
  e.clamped_eigenvalues = 4;
  if (scaled) {
    Standardization s;
    s.feature_mean = draw(2);
    s.feature_scale = draw(2);
    s.target_mean = -0.1;
    s.target_scale = 2.0 / 3.0;
    e.scaling = s;
  }
  return e;
}

class ArtifactTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("djack_artifact_" + std::to_string(::testing::UnitTest::GetInstance()
                                                   ->random_seed()) +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string rewrite(const fs::path& path, const std::string& from,
                      const std::string& to) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    text.replace(text.find(from), from.size(), to);
    const fs::path out = dir_ / "edited.txt";
    std::ofstream(out) << text;
    return out.string();
  }

  fs::path dir_;
};

TEST_F(ArtifactTest, RoundTripIsBitExact) {
  for (const bool scaled : {false, true}) {
    const LooEnsemble e = sample_ensemble(scaled);
    const fs::path path = dir_ / "e.txt";
    save_ensemble(e, path);
    const LooEnsemble back = load_ensemble(path);
    EXPECT_EQ(back.spec.canonical(), e.spec.canonical());
    EXPECT_EQ(back.base, e.base);
    ASSERT_EQ(back.size(), e.size());
    for (std::size_t i = 0; i < e.loo_params.size(); ++i) {
      EXPECT_EQ(back.loo_params[i], e.loo_params[i]);
      EXPECT_EQ(back.residuals[i], e.residuals[i]);
    }
    EXPECT_EQ(back.order, 1);
    EXPECT_EQ(back.mode, SecondOrderMode::kMainText);
    EXPECT_EQ(back.signs, SignConvention::kAlgorithm1);
    EXPECT_EQ(back.inverse_mode, InverseHvpMode::kStochasticNeumann);
    EXPECT_EQ(back.damping, 0.1);
    EXPECT_EQ(back.clamped_eigenvalues, 4);
    EXPECT_EQ(back.scaling.has_value(), scaled);
    if (scaled) {
      EXPECT_EQ(back.scaling->feature_scale, e.scaling->feature_scale);
      EXPECT_EQ(back.scaling->target_scale, e.scaling->target_scale);
    }
    const std::vector<double> x{0.3, -1.2};
    EXPECT_EQ(dj_interval(back, x, 0.3).upper, dj_interval(e, x, 0.3).upper);
  }
}

TEST_F(ArtifactTest, SpecCanonicalFormParses) {
  const ModelSpec spec = sample_ensemble(false).spec;
  const ModelSpec back = parse_canonical_spec(spec.canonical());
  EXPECT_EQ(back.canonical(), spec.canonical());
  EXPECT_EQ(spec_hash(back), spec_hash(spec));
  ModelSpec other = spec;
  other.l2_penalty = 0.5;
  EXPECT_NE(spec_hash(other), spec_hash(spec));
  EXPECT_THROW(parse_canonical_spec("d=1;hidden=2"), UsageError);
  EXPECT_THROW(parse_canonical_spec("d=1;hidden=2;act=tanh;l2=0;extra=1"), UsageError);
}

TEST_F(ArtifactTest, RejectsBadFiles) {
  EXPECT_THROW(load_ensemble(dir_ / "missing.txt"), IoError);
  const fs::path path = dir_ / "e.txt";
  save_ensemble(sample_ensemble(true), path);
  EXPECT_THROW(load_ensemble(rewrite(path, "djack-ensemble 1", "djack-ensemble 9")),
               IoError);
  EXPECT_THROW(load_ensemble(rewrite(path, "act=relu", "act=tanh")), IoError);
  EXPECT_THROW(load_ensemble(rewrite(path, "count 6", "count 7")), IoError);
  EXPECT_THROW(load_ensemble(rewrite(path, "mode main_text", "mode both")), IoError);
  try {
    load_ensemble(rewrite(path, "order 1", "order x"));
    FAIL();
  } catch (const IoError& err) {
    EXPECT_NE(std::string(err.what()).find("edited.txt:4"), std::string::npos)
        << err.what();
  }
}

}  // namespace
}  // namespace djack
