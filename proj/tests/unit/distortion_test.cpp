#include "calib/distortion.hpp"

#include "calib/geometry.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace calib;

namespace {

const Intrinsics kCamera{500.0, 500.0, 0.0, 320.0, 240.0};
const Intrinsics kSkewed{500.0, 500.0, 10.0, 320.0, 240.0};

std::vector<double> zeros(FnKind kind) {
    return std::vector<double>(coeff_count(kind, 3), 0.0);
}

const std::vector<FnKind> kCatalog = {FnKind::T1, FnKind::T2, FnKind::T3, FnKind::T4, FnKind::T5,
                                      FnKind::T6, FnKind::T7, FnKind::T8, FnKind::T9, FnKind::T10};

std::vector<double> small_coeffs(FnKind kind, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> draw(-0.2, 0.2);
    std::vector<double> k(coeff_count(kind, 3));
    for (double &c : k) {
        c = draw(rng);
    }
    return k;
}

} // namespace

TEST_CASE("zero coefficients give unit gain for every kind") {
    for (FnKind kind : kCatalog) {
        CHECK(eval_fn(kind, zeros(kind), 0.7) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(eval_fn(FnKind::PolyEven, std::vector<double>(6, 0.0), 0.7) == doctest::Approx(1.0));
    CHECK(eval_fn(FnKind::GeneralRational, std::vector<double>(5, 0.0), 0.7) ==
          doctest::Approx(1.0));
}

TEST_CASE("kind 2 evaluates 1 + k r^2 directly") {
    CHECK(eval_fn(FnKind::T2, std::vector<double>{-0.2}, 0.5) ==
          doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("a vanishing rational denominator is a pole") {
    CHECK_THROWS_AS(eval_fn(FnKind::T5, std::vector<double>{-1.0}, 1.0), PoleAtRadius);
}

TEST_CASE("f(0) = 1 for every kind and coefficient draw") {
    std::mt19937_64 rng(11);
    for (FnKind kind : kCatalog) {
        for (int trial = 0; trial < 20; ++trial) {
            CHECK(eval_fn(kind, small_coeffs(kind, rng), 0.0) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("the general rational form specializes to each rational catalog entry") {
    // Embeddings of T5..T10 into (1 + c1 r + c2 r^2)/(1 + c3 r + c4 r^2 + c5 r^3).
    const double a = 0.11, b = -0.23, c = 0.05;
    const struct {
        FnKind kind;
        std::vector<double> k;
        std::vector<double> general;
    } cases[] = {
        {FnKind::T5, {a}, {0, 0, a, 0, 0}},
        {FnKind::T6, {a}, {0, 0, 0, a, 0}},
        {FnKind::T7, {a, b}, {a, 0, 0, b, 0}},
        {FnKind::T8, {a, b}, {0, 0, a, b, 0}},
        {FnKind::T9, {a, b, c}, {a, 0, b, c, 0}},
        {FnKind::T10, {a, b, c}, {0, a, b, c, 0}},
    };
    for (const auto &tc : cases) {
        for (int i = 0; i <= 40; ++i) {
            const double r = 0.03 * i;
            const double expected = eval_fn(tc.kind, tc.k, r);
            const double general = eval_fn(FnKind::GeneralRational, tc.general, r);
            CHECK(std::abs(general - expected) <= 1e-15 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("even-power polynomials nest the catalog polynomials") {
    for (int i = 0; i <= 40; ++i) {
        const double r = 0.03 * i;
        CHECK(eval_fn(FnKind::PolyEven, std::vector<double>{-0.2}, r) ==
              eval_fn(FnKind::T2, std::vector<double>{-0.2}, r));
        CHECK(eval_fn(FnKind::PolyEven, std::vector<double>{-0.2, 0.07}, r) ==
              eval_fn(FnKind::T4, std::vector<double>{-0.2, 0.07}, r));
    }
}

TEST_CASE("derivatives match central differences") {
    std::mt19937_64 rng(13);
    for (FnKind kind : kCatalog) {
        const auto k = small_coeffs(kind, rng);
        for (double r : {0.1, 0.45, 0.9}) {
            const double h = 1e-6;
            const double fd = (eval_fn(kind, k, r + h) - eval_fn(kind, k, r - h)) / (2 * h);
            CHECK(eval_fn_deriv(kind, k, r) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("radial distortion fixes the origin and scales both axes") {
    const DistortionFn fn{FnKind::T2, {-0.2}};
    const NormalizedPoint at_origin = distort_radial({0, 0}, fn);
    CHECK(at_origin.x == 0.0);
    CHECK(at_origin.y == 0.0);

    const NormalizedPoint p = distort_radial({0.3, 0.4}, fn);
    CHECK(p.x == doctest::Approx(0.285).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(0.38).epsilon(1e-15));
}

TEST_CASE("radial distortion is odd and fixes only the origin, for every kind") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(-0.8, 0.8);
    for (FnKind kind : kCatalog) {
        const DistortionFn fn{kind, small_coeffs(kind, rng)};
        for (int i = 0; i < 200; ++i) {
            const NormalizedPoint p{unit(rng), unit(rng)};
            const NormalizedPoint plus = distort_radial(p, fn);
            const NormalizedPoint minus = distort_radial({-p.x, -p.y}, fn);
            CHECK(minus.x == doctest::Approx(-plus.x).epsilon(1e-15));
            CHECK(minus.y == doctest::Approx(-plus.y).epsilon(1e-15));
            // r_d = 0 iff r = 0: small coefficients keep the gain positive
            if (p.radius() > 1e-6) {
                CHECK(plus.radius() > 0.0);
            }
        }
        const NormalizedPoint origin = distort_radial({0.0, 0.0}, fn);
        CHECK(origin.x == 0.0);
        CHECK(origin.y == 0.0);
    }
}

TEST_CASE("radial distortion commutes with rotations about the origin") {
    const DistortionFn fn{FnKind::T4, {-0.15, 0.05}};
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unit(-0.6, 0.6);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    for (int i = 0; i < 300; ++i) {
        const NormalizedPoint p{unit(rng), unit(rng)};
        const double a = angle(rng);
        const double ca = std::cos(a), sa = std::sin(a);
        const NormalizedPoint rotated{ca * p.x - sa * p.y, sa * p.x + ca * p.y};
        const NormalizedPoint d1 = distort_radial(rotated, fn);
        const NormalizedPoint d0 = distort_radial(p, fn);
        const NormalizedPoint d0r{ca * d0.x - sa * d0.y, sa * d0.x + ca * d0.y};
        CHECK(std::abs(d1.x - d0r.x) < 1e-12);
        CHECK(std::abs(d1.y - d0r.y) < 1e-12);
    }
}

TEST_CASE("geometric reduces exactly to radial when the axis coefficients match") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(-0.8, 0.8);
    for (FnKind kind : kCatalog) {
        const auto k = small_coeffs(kind, rng);
        const GeometricModel geo{kind, k, k};
        const DistortionFn fn{kind, k};
        for (int i = 0; i < 100; ++i) {
            const NormalizedPoint p{unit(rng), unit(rng)};
            const NormalizedPoint a = distort_geometric(p, geo, kSkewed);
            const NormalizedPoint b = distort_radial(p, fn);
            CHECK(a.x == b.x); // bitwise: identical arithmetic on both paths
            CHECK(a.y == b.y);
        }
    }
}

TEST_CASE("two-axis gains evaluate per axis") {
    const GeometricModel geo{FnKind::T5, {0.1}, {0.2}};
    const NormalizedPoint p = distort_geometric({0.3, 0.4}, geo, kCamera);
    CHECK(p.x == doctest::Approx(0.3 / 1.05).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(0.4 / 1.10).epsilon(1e-15));
}

TEST_CASE("the pixel-offset pair matches the normalized pair when skew is zero") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(-0.8, 0.8);
    GeometricModel normalized{FnKind::T3, {-0.1, 0.04}, {-0.12, 0.05}};
    GeometricModel pixel = normalized;
    pixel.formulation = Formulation::UDPixel;
    for (int i = 0; i < 1000; ++i) {
        const NormalizedPoint p{unit(rng), unit(rng)};
        const NormalizedPoint a = distort_geometric(p, normalized, kCamera);
        const NormalizedPoint b = distort_geometric(p, pixel, kCamera);
        CHECK(a.x == doctest::Approx(b.x).epsilon(1e-15));
        CHECK(a.y == b.y);
    }
}

TEST_CASE("pixel-domain map is the camera-matrix conjugate of the normalized map") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(-0.7, 0.7);
    const GeometricModel geo{FnKind::T7, {0.08, -0.1}, {0.06, -0.04}};
    for (int i = 0; i < 1000; ++i) {
        const NormalizedPoint p{unit(rng), unit(rng)};
        const PixelPoint via_normalized =
            normalized_to_pixel(distort_geometric(p, geo, kSkewed), kSkewed);
        const PixelPoint via_pixel =
            distort_geometric_pixel(normalized_to_pixel(p, kSkewed), geo, kSkewed);
        CHECK(std::abs(via_normalized.u - via_pixel.u) < 1e-10);
        CHECK(std::abs(via_normalized.v - via_pixel.v) < 1e-10);
    }
}

TEST_CASE("pixel-domain map fixes the principal point") {
    const GeometricModel geo{FnKind::T2, {-0.3}, {0.2}};
    const PixelPoint p = distort_geometric_pixel({320, 240}, geo, kSkewed);
    CHECK(p.u == doctest::Approx(320.0));
    CHECK(p.v == doctest::Approx(240.0));
}

TEST_CASE("with zero skew and equal axes the pixel map is plain offset scaling") {
    const GeometricModel geo{FnKind::T2, {-0.2}, {-0.2}};
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const PixelPoint p{64.0 * i, 48.0 * j};
            const double r = pixel_to_normalized(p, kCamera).radius();
            const double f = eval_fn(FnKind::T2, std::vector<double>{-0.2}, r);
            const PixelPoint d = distort_geometric_pixel(p, geo, kCamera);
            CHECK(d.u == doctest::Approx(320.0 + (p.u - 320.0) * f).epsilon(1e-12));
            CHECK(d.v == doctest::Approx(240.0 + (p.v - 240.0) * f).epsilon(1e-12));
        }
    }
}

TEST_CASE("distorted-to-undistorted map evaluates at the distorted radius") {
    const NormalizedPoint at_origin = distort_du({0, 0}, GeometricModel{FnKind::T2, {0.1}, {0.3}});
    CHECK(at_origin.x == 0.0);
    CHECK(at_origin.y == 0.0);

    const GeometricModel identity{FnKind::T3, {0, 0}, {0, 0}};
    const NormalizedPoint same = distort_du({0.4, -0.3}, identity);
    CHECK(same.x == 0.4);
    CHECK(same.y == -0.3);

    const GeometricModel geo{FnKind::T2, {0.1}, {0.3}};
    const NormalizedPoint p = distort_du({0.6, 0.8}, geo); // r_d = 1
    CHECK(p.x == doctest::Approx(0.66).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(1.04).epsilon(1e-15));
}

TEST_CASE("decentering model fixes the principal point") {
    const std::vector<double> coeffs{-0.1, 0.02, -0.01, 0.001, -0.002, 0.01};
    const PixelPoint p = distort_decentering({320, 240}, coeffs, kCamera);
    CHECK(p.u == doctest::Approx(320.0));
    CHECK(p.v == doctest::Approx(240.0));
}

TEST_CASE("decentering with zero tangential terms is the even-polynomial pixel map") {
    const std::vector<double> coeffs{-0.1, 0.02, -0.01, 0.0, 0.0, 0.0};
    const std::vector<double> poly{-0.1, 0.02, -0.01};
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const PixelPoint p{64.0 * i, 48.0 * j};
            const double r = pixel_to_normalized(p, kCamera).radius();
            const double f = eval_fn(FnKind::PolyEven, poly, r);
            const PixelPoint d = distort_decentering(p, coeffs, kCamera);
            CHECK(d.u == doctest::Approx(320.0 + (p.u - 320.0) * f).epsilon(1e-12));
            CHECK(d.v == doctest::Approx(240.0 + (p.v - 240.0) * f).epsilon(1e-12));
        }
    }
}

TEST_CASE("decentering tangential terms match the worked values") {
    // Offsets (1, 2) px with the camera scaled so the normalized radius of
    // that offset is exactly 0.1: alpha = beta = 10 sqrt(5).
    const double s = 10.0 * std::sqrt(5.0);
    const Intrinsics intr{s, s, 0.0, 0.0, 0.0};
    const std::vector<double> coeffs{0.0, 0.0, 0.0, 0.01, 0.0, 0.0};
    const PixelPoint d = distort_decentering({1.0, 2.0}, coeffs, intr);
    CHECK(d.u == doctest::Approx(1.04).epsilon(1e-12));
    CHECK(d.v == doctest::Approx(2.0801).epsilon(1e-12));
}

TEST_CASE("coefficient counts are enforced") {
    CHECK_THROWS_AS(eval_fn(FnKind::T9, std::vector<double>{0.1}, 0.5), Error);
    CHECK(coeff_count(FnKind::T10) == 3);
    CHECK(coeff_count(FnKind::PolyEven, 6) == 6);
    CHECK(coeff_count(FnKind::GeneralRational) == 5);
    CHECK(coeff_count(FnKind::Decentering) == 6);
}
