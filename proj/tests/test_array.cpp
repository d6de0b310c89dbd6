#include "ucadoa/array.hpp"
#include "ucadoa/subspace.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace ucadoa;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("steering vector: zero elevation collapses every phase") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    for (double az : {0.0, 37.0, 359.5}) {
        const VecC a = steering_vector(cfg, az, 0.0);
        for (int n = 0; n < cfg.n_sensors; ++n) CHECK(a(n) == cxd(1.0, 0.0));
    }
}

TEST_CASE("steering vector: full-turn phase at the reference sensor") {
    // r = wavelength, azimuth aligned with sensor 0, horizon incidence:
    // the phase is exactly 2*pi, so the entry returns to 1.
    const ArrayConfig cfg{15, 1.0, 1.0};
    const VecC a = steering_vector(cfg, 0.0, 90.0);
    CHECK(std::abs(a(0) - cxd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering vector: entry matches a scalar phase evaluation") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    const VecC a = steering_vector(cfg, 60.0, 30.0);
    // Sensor 1 sits at 24 degrees; phase = 2*pi * sin(30) * cos(60 - 24).
    const double phase = 2.0 * kPi * std::sin(kPi / 6.0) * std::cos(36.0 * kPi / 180.0);
    CHECK(std::abs(a(1) - std::polar(1.0, phase)) < 1e-14);
}

TEST_CASE("steering vector: unit modulus everywhere") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int d = 0; d < 50; ++d) {
        const ArrayConfig cfg{3 + static_cast<int>(gen() % 14), 0.25 + uni(gen), 1.0};
        const VecC a = steering_vector(cfg, 360.0 * uni(gen), 90.0 * uni(gen));
        for (int n = 0; n < cfg.n_sensors; ++n) CHECK(std::abs(std::abs(a(n)) - 1.0) < 1e-12);
    }
}

TEST_CASE("steering vector: rejects out-of-range angles") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    CHECK_THROWS_AS(steering_vector(cfg, -1.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(steering_vector(cfg, 360.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(steering_vector(cfg, 10.0, -0.5), std::domain_error);
    CHECK_THROWS_AS(steering_vector(cfg, 10.0, 90.5), std::domain_error);
}

TEST_CASE("coupling vector: free-coefficient count by array parity") {
    CHECK(CouplingVector::dof(15) == 8); // odd: (N+1)/2
    CHECK(CouplingVector::dof(5) == 3);
    CHECK(CouplingVector::dof(16) == 9); // even: N/2 + 1
    CHECK(CouplingVector::dof(4) == 3);
}

TEST_CASE("coupling vector: magnitude ordering is weak") {
    CouplingVector c = CouplingVector::identity(15);
    c.coeffs(1) = cxd(0.79, 0.432);
    c.coeffs(2) = cxd(0.35, 0.16);
    CHECK_NOTHROW(c.validate_magnitudes()); // trailing zeros are allowed

    c.coeffs(3) = cxd(0.9, 0.0); // grows past |c3|
    CHECK_THROWS_AS(c.validate_magnitudes(), std::invalid_argument);
}

TEST_CASE("coupling matrix: no coupling gives the identity") {
    const CouplingMatrix m = coupling_matrix(CouplingVector::identity(7));
    CHECK((m.matrix - MatC::Identity(7, 7)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling matrix: five-sensor first row mirrors the tail") {
    CouplingVector c;
    c.n_sensors = 5;
    c.coeffs = VecC(3);
    c.coeffs << cxd(1, 0), cxd(0.5, 0), cxd(0.2, 0);
    const MatC m = coupling_matrix(c).matrix;
    const double expected[5] = {1.0, 0.5, 0.2, 0.2, 0.5};
    for (int j = 0; j < 5; ++j) CHECK(m(0, j) == cxd(expected[j], 0.0));
    // cyclic shift row to row
    for (int i = 1; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(m(i, j) == m(i - 1, (j + 4) % 5));
}

TEST_CASE("coupling matrix: fifteen-sensor two-term benchmark row") {
    CouplingVector c = CouplingVector::identity(15);
    c.coeffs(1) = cxd(0.79, 0.432);
    c.coeffs(2) = cxd(0.35, 0.16);
    const MatC m = coupling_matrix(c).matrix;
    CHECK(m(0, 0) == cxd(1.0, 0.0));
    CHECK(m(0, 1) == cxd(0.79, 0.432));
    CHECK(m(0, 2) == cxd(0.35, 0.16));
    for (int j = 3; j <= 12; ++j) CHECK(m(0, j) == cxd(0.0, 0.0));
    CHECK(m(0, 13) == cxd(0.35, 0.16));
    CHECK(m(0, 14) == cxd(0.79, 0.432));
}

TEST_CASE("coupling matrix: exactly symmetric and circulant") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int n : {4, 5, 15, 16}) {
        CouplingVector c = CouplingVector::identity(n);
        double mag = 1.0;
        for (int i = 1; i < c.coeffs.size(); ++i) {
            mag *= uni(gen); // keep the ordering invariant
            c.coeffs(i) = std::polar(mag, 2.0 * kPi * uni(gen));
        }
        const MatC m = coupling_matrix(c).matrix;
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(m(i, j) == m(i - 1, (j - 1 + n) % n));
    }
}

TEST_CASE("coupling matrix: wrong coefficient count is rejected") {
    CouplingVector c;
    c.n_sensors = 15;
    c.coeffs = VecC::Zero(5); // needs 8
    c.coeffs(0) = 1.0;
    CHECK_THROWS_AS(coupling_matrix(c), std::invalid_argument);
}

TEST_CASE("synthesize: noiseless single source single snapshot is one steering term") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{123.4, 41.0, 1.0}};
    const auto [x, gt] = synthesize(cfg, set, CouplingVector::identity(15), 1, kInf, 9);
    REQUIRE(x.data.rows() == 15);
    REQUIRE(x.data.cols() == 1);
    const VecC a = steering_vector(cfg, 123.4, 41.0);
    const cxd s = x.data(0, 0) / a(0);
    CHECK(std::abs(s) > 0.0);
    for (int n = 0; n < 15; ++n) CHECK(std::abs(x.data(n, 0) - a(n) * s) < 1e-13 * std::abs(s));
    CHECK(gt.noise_variance == 0.0);
}

TEST_CASE("synthesize: benchmark scenario dimensions") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{243.4, 18.3, 1.0}, {60.0, 83.6, 1.0}, {357.8, 73.9, 1.0}};
    CouplingVector c = CouplingVector::identity(15);
    c.coeffs(1) = cxd(0.79, 0.432);
    c.coeffs(2) = cxd(0.35, 0.16);
    const auto [x, gt] = synthesize(cfg, set, c, 200, 10.0, 1);
    CHECK(x.data.rows() == 15);
    CHECK(x.data.cols() == 200);
    CHECK(x.snapshot_count() == 200);
    CHECK(gt.noise_variance == doctest::Approx(0.1).epsilon(1e-12)); // max power 1, SNR 10 dB
    CHECK(gt.per_source_snr_db.size() == 3);
}

TEST_CASE("synthesize: deterministic under a fixed seed") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{10.0, 20.0, 1.0}, {200.0, 70.0, 0.5}};
    CouplingVector c = CouplingVector::identity(15);
    c.coeffs(1) = cxd(0.3, 0.2);
    const auto [x1, gt1] = synthesize(cfg, set, c, 32, 7.0, 77);
    const auto [x2, gt2] = synthesize(cfg, set, c, 32, 7.0, 77);
    CHECK((x1.data.array() == x2.data.array()).all());
    const auto [x3, gt3] = synthesize(cfg, set, c, 32, 7.0, 78);
    CHECK((x1.data.array() != x3.data.array()).any());
}

TEST_CASE("synthesize: identity coupling commutes with an explicit identity multiply") {
    const ArrayConfig cfg{9, 0.8, 1.0};
    SourceSet set;
    set.sources = {{45.0, 33.0, 1.0}};
    const CouplingVector id = CouplingVector::identity(9);
    const auto [x, gt] = synthesize(cfg, set, id, 16, 12.0, 5);
    const MatC applied = coupling_matrix(id).matrix * x.data;
    CHECK((applied.array() == x.data.array()).all());
}

TEST_CASE("synthesize: noise-only covariance approaches its nominal value") {
    // Zero-source draw at 0 dB leaves unit-variance noise; the sample
    // covariance must settle near the identity entrywise by T = 1e5.
    const ArrayConfig cfg{15, 1.0, 1.0};
    const auto [x, gt] = synthesize(cfg, SourceSet{}, CouplingVector::identity(15), 100000, 0.0, 17);
    CHECK(gt.noise_variance == 1.0);
    const MatC r = sample_covariance(x);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            CHECK(std::abs(r(i, j) - want) < 0.05);
        }
}

TEST_CASE("synthesize: per-source noise floor follows the strongest source") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{10.0, 20.0, 4.0}, {100.0, 50.0, 1.0}};
    const auto [x, gt] = synthesize(cfg, set, CouplingVector::identity(15), 4, 20.0, 3);
    CHECK(gt.noise_variance == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(gt.per_source_snr_db[0] == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(gt.per_source_snr_db[1] == doctest::Approx(20.0 - 10.0 * std::log10(4.0)).epsilon(1e-9));
}

TEST_CASE("ground truth: serializes to JSON with the trial description") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{243.4, 18.3, 1.0}};
    const auto [x, gt] = synthesize(cfg, set, CouplingVector::identity(15), 8, kInf, 21);
    const std::string j = gt.to_json();
    CHECK(j.find("\"noiseless\": true") != std::string::npos);
    CHECK(j.find("\"seed\": 21") != std::string::npos);
    CHECK(j.find("243.4") != std::string::npos);
}

TEST_CASE("validation: configuration and source ranges") {
    CHECK_THROWS_AS((ArrayConfig{2, 1.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ArrayConfig{15, 0.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ArrayConfig{15, 1.0, -1.0}).validate(), std::invalid_argument);

    SourceSet empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    SourceSet bad_az;
    bad_az.sources = {{360.0, 10.0, 1.0}};
    CHECK_THROWS_AS(bad_az.validate(), std::invalid_argument);
    SourceSet bad_el;
    bad_el.sources = {{10.0, 91.0, 1.0}};
    CHECK_THROWS_AS(bad_el.validate(), std::invalid_argument);
    SourceSet bad_pw;
    bad_pw.sources = {{10.0, 10.0, 0.0}};
    CHECK_THROWS_AS(bad_pw.validate(), std::invalid_argument);
}
