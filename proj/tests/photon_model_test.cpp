// Copyright 2026 The mzphase Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mzphase/photon_model.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "gtest/gtest.h"
#include "mzphase/errors.hpp"

using namespace mzphase;

namespace {

constexpr double kPi = std::numbers::pi;

double direct_poisson(unsigned k, double mean) {
  double v = std::exp(-mean);
  for (unsigned i = 1; i <= k; ++i) v *= mean / i;
  return v;
}

}  // namespace

TEST(InterferometerModel, RejectsNonPositiveMean) {
  EXPECT_THROW(InterferometerModel(0.0), DomainError);
  EXPECT_THROW(InterferometerModel(-1.0), DomainError);
}

TEST(InterferometerModel, OutputMeans) {
  const InterferometerModel model(1.08);
  auto m = model.output_means(0.0);
  EXPECT_DOUBLE_EQ(m.mu_c, 1.08);
  EXPECT_DOUBLE_EQ(m.mu_d, 0.0);
  m = model.output_means(kPi / 2);
  EXPECT_NEAR(m.mu_c, 0.54, 1e-15);
  EXPECT_NEAR(m.mu_d, 0.54, 1e-15);
  m = model.output_means(0.24 * kPi);
  EXPECT_NEAR(m.mu_c, 0.933643058807562, 1e-14);
  EXPECT_NEAR(m.mu_d, 0.146356941192438, 1e-14);
}

TEST(InterferometerModel, PhaseOutsideDomainThrows) {
  const InterferometerModel model(1.08);
  EXPECT_THROW(model.output_means(-1e-9), DomainError);
  EXPECT_THROW(model.output_means(kPi + 1e-9), DomainError);
  EXPECT_THROW(model.probability(4.0, {0, 0}), DomainError);
}

TEST(InterferometerModel, FluxConservedOnGrid) {
  const InterferometerModel model(1.08);
  for (int i = 0; i <= 200; ++i) {
    const auto m = model.output_means(kPi * i / 200.0);
    EXPECT_NEAR(m.mu_c + m.mu_d, 1.08, 4 * std::numeric_limits<double>::epsilon());
    EXPECT_GE(m.mu_c, 0.0);
    EXPECT_GE(m.mu_d, 0.0);
  }
}

TEST(InterferometerModel, LikelihoodExamples) {
  const InterferometerModel model(1.08);
  for (unsigned k = 1; k < 6; ++k) EXPECT_EQ(model.probability(0.0, {0, k}), 0.0);
  EXPECT_NEAR(model.probability(kPi / 2, {0, 0}), 0.339595525644939, 1e-14);
  for (double nbar : {0.3, 1.08, 2.5, 7.0}) {
    const InterferometerModel m(nbar);
    const double expected = (nbar / 2) * (nbar / 2) * std::exp(-nbar);
    EXPECT_NEAR(m.probability(kPi / 2, {1, 1}), expected, 1e-14 * expected);
    EXPECT_NEAR(m.probability(kPi / 2, {1, 1}),
                direct_poisson(1, nbar / 2) * direct_poisson(1, nbar / 2), 1e-15);
  }
}

TEST(InterferometerModel, MatchesDirectPoissonProduct) {
  const InterferometerModel model(1.7);
  for (double phi : {0.3, 1.1, 2.9}) {
    const auto m = model.output_means(phi);
    for (unsigned nc = 0; nc < 8; ++nc) {
      for (unsigned nd = 0; nd < 8; ++nd) {
        const double expected =
            direct_poisson(nc, m.mu_c) * direct_poisson(nd, m.mu_d);
        EXPECT_NEAR(model.probability(phi, {nc, nd}), expected,
                    1e-13 * expected + 1e-300);
      }
    }
  }
}

TEST(InterferometerModel, TruncatedMassCoversTail) {
  for (double nbar : {0.5, 1.08, 2.0}) {
    const InterferometerModel model(nbar);
    for (int i = 0; i <= 20; ++i) {
      EXPECT_GE(model.truncated_mass(kPi * i / 20.0), 1.0 - 1e-9);
    }
  }
}

TEST(InterferometerModel, SamplingAtEndpoints) {
  const InterferometerModel model(1.08);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    RandomStream rng(seed);
    for (int i = 0; i < 2000; ++i) {
      EXPECT_EQ(model.sample(0.0, rng).n_d, 0u);
      EXPECT_EQ(model.sample(kPi, rng).n_c, 0u);
    }
  }
}

TEST(InterferometerModel, EmpiricalZeroProbabilityAtBalance) {
  const InterferometerModel model(1.08);
  RandomStream rng(20261018);
  const int draws = 1'000'000;
  int zeros = 0;
  for (int i = 0; i < draws; ++i) {
    const auto o = model.sample(kPi / 2, rng);
    if (o.n_c == 0 && o.n_d == 0) ++zeros;
  }
  const double p = std::exp(-1.08);
  const double sigma = std::sqrt(p * (1 - p) / draws);
  EXPECT_NEAR(static_cast<double>(zeros) / draws, p, 5 * sigma);
}

TEST(InterferometerModel, ChiSquaredGoodnessOfFit) {
  const InterferometerModel model(1.08);
  const int draws = 100'000;
  for (double frac : {0.1, 0.5, 0.9}) {
    const double phi = frac * kPi;
    RandomStream rng(static_cast<std::uint64_t>(frac * 1000));
    // Cells with expected count < 5 are pooled into one.
    std::map<Outcome, int> observed;
    for (int i = 0; i < draws; ++i) ++observed[model.sample(phi, rng)];
    double chi2 = 0.0;
    int cells = 0;
    double pooled_expected = 0.0;
    int pooled_observed = 0;
    for (unsigned nc = 0; nc <= 25; ++nc) {
      for (unsigned nd = 0; nd <= 25; ++nd) {
        const double e = draws * model.probability(phi, {nc, nd});
        const auto it = observed.find({nc, nd});
        const int o = it == observed.end() ? 0 : it->second;
        if (e < 5.0) {
          pooled_expected += e;
          pooled_observed += o;
        } else {
          chi2 += (o - e) * (o - e) / e;
          ++cells;
        }
      }
    }
    pooled_expected += draws * (1.0 - model.truncated_mass(phi));
    if (pooled_expected > 0.0) {
      chi2 += (pooled_observed - pooled_expected) *
              (pooled_observed - pooled_expected) / pooled_expected;
      ++cells;
    }
    boost::math::chi_squared dist(cells - 1);
    const double critical = boost::math::quantile(complement(dist, 0.001));
    EXPECT_LT(chi2, critical) << "phi/pi=" << frac;
  }
}

TEST(RandomStream, KeyedStreamsAreReproducibleAndDistinct) {
  auto a = stream_for(7, 3, 4);
  auto b = stream_for(7, 3, 4);
  auto c = stream_for(7, 4, 3);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    if (x != c.uniform()) differs = true;
  }
  EXPECT_TRUE(differs);
}

TEST(RandomStream, PoissonMeanAndVariance) {
  RandomStream rng(5);
  for (double mean : {0.2, 1.08, 12.0, 45.0}) {
    const int n = 200'000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = rng.poisson(mean);
      sum += k;
      sum2 += k * k;
    }
    const double m = sum / n;
    const double var = sum2 / n - m * m;
    EXPECT_NEAR(m, mean, 5 * std::sqrt(mean / n));
    EXPECT_NEAR(var / mean, 1.0, 0.03);
  }
  EXPECT_EQ(rng.poisson(0.0), 0u);
}
