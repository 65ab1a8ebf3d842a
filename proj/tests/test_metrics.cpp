// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The scsice Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cmath>

#include <Eigen/LU>
#include <catch2/catch_amalgamated.hpp>

#include "scsice/metrics.hpp"
#include "test_util.hpp"

using namespace scsice;

TEST_CASE("nmse", "[metrics]")
{
    Rng rng(1);
    const CMat h = test::random_matrix(rng, 8, 4);

    SECTION("exact estimate hits the floor")
    {
        const auto r = nmse({h}, {h});
        CHECK(r.db == kDbFloor);
        CHECK(r.used == 1);
    }
    SECTION("zero estimate is 0 dB")
    {
        CHECK(nmse({CMat::Zero(8, 4)}, {h}).db == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("ten percent amplitude error is -20 dB")
    {
        CHECK(nmse({1.1 * h}, {h}).db == Catch::Approx(-20.0).margin(1e-9));
    }
    SECTION("average of per-matrix dB values")
    {
        const CMat g = test::random_matrix(rng, 8, 4);
        CHECK(nmse({1.1 * h, 1.01 * g}, {h, g}).db == Catch::Approx(-30.0).margin(1e-9));
    }
    SECTION("zero truths are skipped")
    {
        const auto r = nmse({h, h}, {h * 1.1, CMat::Zero(8, 4)});
        CHECK(r.skipped == 1);
        CHECK(r.used == 1);
    }
    SECTION("shape errors")
    {
        CHECK_THROWS_AS(nmse({h}, {h, h}), ConfigError);
        CHECK_THROWS_AS(nmse({CMat::Zero(4, 4)}, {h}), ConfigError);
    }
}

TEST_CASE("to_db", "[metrics]")
{
    CHECK(to_db(1.0) == 0.0);
    CHECK(to_db(0.01) == Catch::Approx(-20.0));
    CHECK(to_db(0.0) == kDbFloor);
    CHECK(to_db(1e-30) == kDbFloor);
}

TEST_CASE("scsi_accuracy", "[metrics]")
{
    Rng rng(4);
    const double sigma2 = 1e-3;
    const CMat rf = test::random_psd(rng, 12, 3);
    const CMat rs = test::random_psd(rng, 6, 2);

    SECTION("exact correlations give the MMSE floor")
    {
        const auto a = scsi_accuracy(rf, rs, rf, rs, sigma2);
        CMat g = rf;
        g.diagonal().array() += sigma2;
        const CMat floor_f = rf - rf * g.inverse() * rf;
        CHECK(a.e_f == Catch::Approx(floor_f.trace().real() / 12.0).epsilon(1e-6));
        CHECK(a.e_f >= 0.0);
        CHECK(a.db == Catch::Approx(10.0 * std::log10(0.5 * (a.e_f + a.e_s))));
    }
    SECTION("zero database correlations give tr(R) / dim")
    {
        const auto a = scsi_accuracy(CMat::Zero(12, 12), CMat::Zero(6, 6), rf, rs, sigma2);
        CHECK(a.e_f == Catch::Approx(rf.trace().real() / 12.0).epsilon(1e-12));
        CHECK(a.e_s == Catch::Approx(rs.trace().real() / 6.0).epsilon(1e-12));
    }
    SECTION("shrunk correlations never beat the exact ones")
    {
        const auto exact = scsi_accuracy(rf, rs, rf, rs, sigma2);
        for (double c : {0.0, 0.1, 0.5, 0.9, 0.99}) {
            const auto a = scsi_accuracy(c * rf, c * rs, rf, rs, sigma2);
            CHECK(a.e_f >= exact.e_f - 1e-15);
            CHECK(a.e_s >= exact.e_s - 1e-15);
        }
    }
    SECTION("dimension mismatch")
    {
        CHECK_THROWS_AS(mmse_mismatch_error(rf, rs, sigma2), ConfigError);
    }
}

TEST_CASE("scsi_accuracy under additive PSD perturbations", "[metrics][!mayfail]")
{
    Rng rng(6);
    const double sigma2 = 1e-3;
    const CMat rf = test::random_psd(rng, 12, 3);
    const CMat rs = test::random_psd(rng, 6, 2);
    const auto exact = scsi_accuracy(rf, rs, rf, rs, sigma2);
    int below = 0;
    for (int t = 0; t < 20; ++t) {
        const auto a = scsi_accuracy(rf + 0.1 * test::random_psd(rng, 12), rs + 0.1 * test::random_psd(rng, 6), rf,
                                     rs, sigma2);
        if (a.db < exact.db) {
            ++below;
        }
    }
    CHECK(below == 0);
}
