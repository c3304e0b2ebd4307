// Copyright 2026 The ntcorr Authors
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


#include <atomic>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "ntcorr/rng.hpp"
#include "ntcorr/verification.hpp"

namespace ntcorr {
namespace {

using namespace verification;

TEST(CounterRng, ReproducibleAndStreamSeparated) {
    CounterRng a(42);
    CounterRng b(42);
    CounterRng c(43);
    CounterRng d(42, 1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
        EXPECT_NE(x, d.next_u64());
        seen.insert(x);
    }
    EXPECT_EQ(seen.size(), 100u);
    EXPECT_EQ(a.counter(), 100u);
    EXPECT_EQ(CounterRng(42).split(3).next_u64(), CounterRng(42).split(3).next_u64());
}

TEST(CounterRng, DistributionsInRange) {
    CounterRng rng(9);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(rng.below(7), 7u);
        const double g = rng.normal();
        sum += g;
        sq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.05);
    EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Generators, PauliStringsAreUnitAndNonIdentity) {
    CounterRng rng(1);
    for (int i = 0; i < 200; ++i) {
        const std::size_t q = 1 + rng.below(4);
        const auto op = random_pauli_string(rng, q);
        ASSERT_EQ(op.terms().size(), 1u);
        EXPECT_EQ(op.terms().front().coefficient, Complex(1.0));
        EXPECT_FALSE(op.terms().front().pauli.factors().empty());
        EXPECT_TRUE(op.is_hermitian());
    }
}

TEST(Generators, HamiltonianNormBounded) {
    CounterRng rng(2);
    for (int i = 0; i < 100; ++i) {
        const std::size_t q = 1 + rng.below(4);
        const auto sys = SystemLayout::of(q);
        const Matrix h = random_spin_hamiltonian(rng, sys, q).to_dense(sys);
        EXPECT_LT(ntcorr::detail::max_abs(h - h.adjoint()), 1e-14);
        const double norm = spectral_norm(h);
        EXPECT_GE(norm, 0.5 - 1e-12);
        EXPECT_LE(norm, 5.0 + 1e-12);
    }
}

TEST(Generators, TimesAndSchedules) {
    CounterRng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto t = random_times(rng, 4);
        EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
        EXPECT_GE(t.front(), 0.0);
        EXPECT_LE(t.back(), 2.0);
        const auto sys = SystemLayout::of(2);
        const auto s = random_schedule(rng, sys, 2);
        EXPECT_GE(s.segments().size(), 1u);
        EXPECT_LE(s.segments().size(), 3u);
        EXPECT_NEAR(s.total_duration(), 2.0, 1e-12);
    }
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
    for (const auto &h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) {
                                      throw std::runtime_error("boom");
                                  }
                              }),
                 std::runtime_error);
    parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Suites, SpinSuitePasses) {
    const auto r = spin_suite({30, 5, 1});
    EXPECT_EQ(r.records.size(), 30u);
    EXPECT_TRUE(r.ok()) << r.max_error();
    EXPECT_LT(r.max_error(), 1e-9);
}

TEST(Suites, BosonSuiteConvergesAtLeastQuadratically) {
    const auto r = boson_suite({4, 6, 1});
    EXPECT_TRUE(r.ok()) << r.max_error();
    for (const auto &rec : r.records) {
        if (rec.coarse_error > 1e-9) {
            EXPECT_GE(rec.halving_ratio, 3.5) << rec.description;
        }
    }
}

TEST(Suites, GibbsFermionAndThreeWaySuitesPass) {
    EXPECT_TRUE(gibbs_suite({10, 7, 1}).ok());
    const auto f = fermion_suite({0, 8, 1});
    EXPECT_EQ(f.records.size(), 30u);  // (1 + 4 + 9 + 16) mode pairs
    EXPECT_TRUE(f.ok()) << f.max_error();
    const auto w = three_way_suite({10, 9, 1});
    EXPECT_TRUE(w.ok()) << w.max_error();
    for (const auto &rec : w.records) {
        EXPECT_TRUE(rec.baseline.has_value());
    }
}

TEST(Suites, DeterministicAcrossJobCounts) {
    const auto a = spin_suite({25, 11, 1});
    const auto b = spin_suite({25, 11, 3});
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].description, b.records[i].description);
        EXPECT_EQ(a.records[i].protocol, b.records[i].protocol);
        EXPECT_EQ(a.records[i].reference, b.records[i].reference);
    }
    const auto c = spin_suite({25, 12, 1});
    EXPECT_NE(a.records[0].protocol, c.records[0].protocol);
}

TEST(Suites, ReportCounts) {
    SuiteReport r;
    r.records.resize(3);
    r.records[0].pass = true;
    r.records[1].pass = false;
    r.records[1].error = 0.5;
    r.records[2].pass = true;
    EXPECT_EQ(r.passed(), 2u);
    EXPECT_EQ(r.failed(), 1u);
    EXPECT_FALSE(r.ok());
    EXPECT_DOUBLE_EQ(r.max_error(), 0.5);
}

} // namespace
} // namespace ntcorr
