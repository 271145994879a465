#include <phychal/rng.hpp>
#include <phychal/stats.hpp>

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace phychal;

namespace {

// Composite Simpson, for independent tail/normalization oracles.
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

double tail_by_quadrature(double x, int order, const noncentral_chi_square& p) {
    // Integrate the pdf from x out to a point far beyond the bulk.
    const double mean = p.lambda + order * p.sigma2;
    const double sd = std::sqrt(order * p.sigma2 * p.sigma2 +
                                2.0 * p.lambda * p.sigma2);
    const double hi = mean + 60.0 * sd + 10.0 * p.sigma2;
    if (x >= hi) return 0.0;
    return simpson([&](double t) { return noncentral_chi_square_pdf(t, order, p); },
                   x, hi, 40000);
}

} // namespace

TEST_CASE("modified bessel anchors") {
    CHECK(bessel_i0(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(bessel_i0(1.5) == doctest::Approx(1.6467231897728907).epsilon(1e-12));
    CHECK(bessel_i1(1.5) / bessel_i0(1.5) ==
          doctest::Approx(0.596133238831291).epsilon(1e-12));
    // log form stays finite where the plain value overflows
    CHECK(std::isinf(bessel_i0(800.0)));
    const double l = log_bessel_i0(800.0);
    CHECK(l > 790.0);
    CHECK(l < 800.0);
    CHECK(log_bessel_i0(20.0) == doctest::Approx(std::log(bessel_i0(20.0))).epsilon(1e-12));
    CHECK(log_bessel_in(1, 1.5) == doctest::Approx(std::log(bessel_i1(1.5))).epsilon(1e-12));
    // underflow regime falls back to the leading series term
    CHECK(log_bessel_in(40, 1e-4) ==
          doctest::Approx(40.0 * std::log(0.5e-4) - std::lgamma(41.0)).epsilon(1e-6));
}

TEST_CASE("marcum q central cases") {
    // Q_1(0, b) = e^{-b}
    for (double b : {0.1, 1.0, 5.0})
        CHECK(marcum_q(1, 0.0, b) == doctest::Approx(std::exp(-b)).epsilon(1e-12));
    // Q_2(0, b) = e^{-b} (1 + b)
    CHECK(marcum_q(2, 0.0, 1.0) ==
          doctest::Approx(std::exp(-1.0) * 2.0).epsilon(1e-12));
    CHECK(marcum_q(1, 3.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(marcum_q(0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(marcum_q(1, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("marcum q matches tail quadrature within 1e-6") {
    for (int order : {1, 2, 4}) {
        for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
            for (double sigma2 : {0.5, 2.0}) {
                const noncentral_chi_square p{lambda, sigma2};
                const double mean = lambda + order * sigma2;
                for (double x : {0.25 * mean + 0.1, mean, 2.0 * mean + 1.0}) {
                    const double q = marcum_q(order, lambda / sigma2, x / sigma2);
                    const double ref = tail_by_quadrature(x, order, p);
                    CHECK(std::abs(q - ref) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("pdf normalizes and cdf complements the tail") {
    const noncentral_chi_square p{10.0, 2.0};
    const int order = 4;
    const double total = tail_by_quadrature(0.0, order, p);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    for (double x : {1.0, 10.0, 30.0}) {
        CHECK(noncentral_chi_square_cdf(x, order, p) +
                  marcum_q(order, p.lambda / p.sigma2, x / p.sigma2) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(noncentral_chi_square_cdf(-1.0, order, p) == 0.0);
}

TEST_CASE("moment fit recovers parameters and inverts the moment relations") {
    rng_t rng(422);
    const int order = 4;
    const double lambda = 50.0, sigma2 = 1.5;
    // Exact draws: sum over slots of |CN(mu_m, sigma2)|^2 with sum mu_m^2 = lambda.
    const double mu = std::sqrt(lambda / order);
    std::vector<double> samples(200000);
    for (auto& s : samples) {
        double acc = 0.0;
        for (int m = 0; m < order; ++m) {
            const double re = mu + std::sqrt(sigma2 / 2) * sample_normal(rng);
            const double im = std::sqrt(sigma2 / 2) * sample_normal(rng);
            acc += re * re + im * im;
        }
        s = acc;
    }
    const auto fit = fit_noncentral_chi_square(samples, order);
    CHECK(fit.lambda == doctest::Approx(lambda).epsilon(0.02));
    CHECK(fit.sigma2 == doctest::Approx(sigma2).epsilon(0.02));
    // The fit inverts mean/variance exactly whenever the discriminant is positive.
    const auto m = compute_moments(samples);
    CHECK(fit.lambda + order * fit.sigma2 == doctest::Approx(m.mean).epsilon(1e-12));
    CHECK(order * fit.sigma2 * fit.sigma2 + 2.0 * fit.lambda * fit.sigma2 ==
          doctest::Approx(m.variance).epsilon(1e-9));
    // Single-slot reduction: lambda = sqrt(2 m1^2 - m2) with m2 the raw second moment.
    const auto fit1 = fit_noncentral_chi_square(samples, 1);
    const double m2 = m.variance + m.mean * m.mean;
    CHECK(fit1.lambda ==
          doctest::Approx(std::sqrt(2.0 * m.mean * m.mean - m2)).epsilon(1e-9));
    const std::vector<double> empty;
    CHECK_THROWS_AS(fit_noncentral_chi_square(empty, 1), std::invalid_argument);
}

TEST_CASE("fit falls back to central when variance exceeds the mean structure") {
    // mean 30, variance 2100 > mean^2 = 900: no valid noncentrality
    std::vector<double> wide(7, 0.0);
    wide.insert(wide.end(), 3, 100.0);
    const auto fit = fit_noncentral_chi_square(wide, 1);
    CHECK(fit.lambda == 0.0);
    CHECK(fit.sigma2 == doctest::Approx(compute_moments(wide).mean).epsilon(1e-12));
}

TEST_CASE("ks statistic against a cdf") {
    // identity cdf on [0,1]
    const auto uniform_cdf = [](double x) { return std::min(std::max(x, 0.0), 1.0); };
    const double d = ks_statistic(std::vector<double>{0.2, 0.5, 0.9}, uniform_cdf);
    CHECK(d == doctest::Approx(0.9 - 2.0 / 3.0).epsilon(1e-12));
    rng_t rng(99);
    std::vector<double> u(20000);
    for (auto& x : u) x = u01(rng);
    CHECK(ks_statistic(u, uniform_cdf) < ks_critical_value(0.01, u.size()));
    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, uniform_cdf),
                    std::invalid_argument);
}

TEST_CASE("two-sample ks statistic") {
    std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(ks_statistic(a, a) == doctest::Approx(0.0));
    std::vector<double> lo{1.0, 2.0}, hi{10.0, 11.0};
    CHECK(ks_statistic(lo, hi) == doctest::Approx(1.0));
}

TEST_CASE("ks critical value") {
    CHECK(ks_critical_value(0.01, 10000) ==
          doctest::Approx(0.016276).epsilon(5e-5));
    CHECK(ks_critical_value(0.05, 100) ==
          doctest::Approx(1.3581 / 10.0).epsilon(1e-3));
    CHECK_THROWS_AS(ks_critical_value(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(ks_critical_value(0.01, 0), std::invalid_argument);
}

TEST_CASE("empirical upper quantile matches the inclusive decision rule") {
    std::vector<double> s;
    for (int i = 1; i <= 1000; ++i) s.push_back(static_cast<double>(i));
    const double thr = empirical_upper_quantile(s, 0.01); // k = 10
    CHECK(thr == doctest::Approx(991.0));
    int hits = 0;
    for (double x : s)
        if (x >= thr) ++hits;
    CHECK(hits == 10);
    // tail too small for one sample: threshold sits above the maximum
    const double top = empirical_upper_quantile(s, 1e-9);
    CHECK(top > 1000.0);
    CHECK_THROWS_AS(empirical_upper_quantile(s, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(empirical_upper_quantile({}, 0.1), std::invalid_argument);
}
