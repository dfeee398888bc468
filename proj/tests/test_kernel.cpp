#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "nsv/error.hpp"
#include "nsv/kernel.hpp"

using namespace nsv;

namespace {

double quad(auto f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, 1e-13);
}

Kernel exp1() { return Kernel::exponential_sum({{1.0, 1.0}}); }

Kernel table_of_exp(double s_end, int rows) {
    std::vector<double> s, mu;
    for (int i = 0; i < rows; ++i) {
        s.push_back(s_end * i / (rows - 1));
        mu.push_back(std::exp(-s.back()));
    }
    return Kernel::tabulated(s, mu);
}

}  // namespace

TEST_CASE("evaluate: single exponential") {
    KernelValues v = exp1().evaluate(0.0);
    CHECK(v.g == doctest::Approx(1.0));
    CHECK(v.mu == doctest::Approx(1.0));
    CHECK(v.mu_prime == doctest::Approx(-1.0));
    KernelValues far = exp1().evaluate(50.0);
    CHECK(far.g < 1e-20);
    CHECK(far.mu < 1e-20);
    CHECK(std::abs(far.mu_prime) < 1e-20);
    CHECK_THROWS_AS(exp1().evaluate(-1e-3), DomainError);
}

TEST_CASE("evaluate: two-term sum") {
    // The raw kernel {(0.5,1),(0.5,3)} has int g = 2/3; the quoted value
    // 0.5e^-1 + 1.5e^-3 is the un-normalized mu(1).
    Kernel raw = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}}, Normalization::as_given);
    const double expect = 0.5 * std::exp(-1.0) + 1.5 * std::exp(-3.0);
    CHECK(raw.mu(1.0) == doctest::Approx(expect).epsilon(1e-15));
    Kernel unit = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    CHECK(unit.mu(1.0) == doctest::Approx(1.5 * expect).epsilon(1e-15));
    CHECK(g_mass(unit) == doctest::Approx(1.0).epsilon(1e-10));
    // numerical differentiation of g
    const double h = 1e-5;
    CHECK(-(unit.g(1.0 + h) - unit.g(1.0 - h)) / (2 * h) == doctest::Approx(unit.mu(1.0)).epsilon(1e-9));
    CHECK(-(unit.mu(1.0 + h) - unit.mu(1.0 - h)) / (2 * h) == doctest::Approx(-unit.mu_prime(1.0)).epsilon(1e-9));
}

TEST_CASE("total_mass") {
    CHECK(total_mass(exp1()) == doctest::Approx(1.0).epsilon(1e-10));
    Kernel k2 = Kernel::exponential_sum({{2.0, 2.0}});  // g = 2 e^{-2s}
    CHECK(k2.g(0.3) == doctest::Approx(2.0 * std::exp(-0.6)));
    CHECK(total_mass(k2) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(total_mass(k2) == doctest::Approx(quad([&](double s) { return 4.0 * std::exp(-2.0 * s); }, 0.0, 60.0)).epsilon(1e-10));
    Kernel two = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    for (double eps : {1.0, 0.5, 0.25, 0.1}) {
        CAPTURE(eps);
        for (const Kernel& k : {exp1(), two, table_of_exp(20.0, 401)}) {
            const double kap = total_mass(k);
            CHECK(total_mass(rescale(k, eps)) * eps == doctest::Approx(kap).epsilon(1e-8));
        }
    }
}

TEST_CASE("dafermos_rate") {
    CHECK(dafermos_rate(Kernel::exponential_sum({{1.0, 2.0}})) == doctest::Approx(2.0));
    Kernel two = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    CHECK(dafermos_rate(two) == doctest::Approx(1.0));
    // grid scan of -mu'/mu on 2048 log points reaches the same infimum
    double inf_ratio = 1e300;
    for (int i = 0; i < 2048; ++i) {
        const double s = 1e-4 * std::pow(50.0 / 1e-4, i / 2047.0);
        inf_ratio = std::min(inf_ratio, -two.mu_prime(s) / two.mu(s));
    }
    CHECK(inf_ratio == doctest::Approx(1.0).epsilon(1e-12));
    Kernel tab = table_of_exp(20.0, 201);
    CHECK(dafermos_rate(tab) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(dafermos_rate(rescale(two, 0.5)) == doctest::Approx(2.0));
}

TEST_CASE("Dafermos inequality and g/mu consistency on a test grid") {
    std::vector<Kernel> ks{exp1(), Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}}),
                           Kernel::exponential_sum({{1.0, 0.5}, {3.0, 4.0}, {0.2, 0.05}}), table_of_exp(20.0, 101),
                           Kernel::tabulated({0.0, 0.5, 1.0, 3.0}, {4.0, 1.0, 0.8, 0.1})};
    for (std::size_t n = 0; n < ks.size(); ++n) {
        CAPTURE(n);
        const Kernel& k = ks[n];
        const double d = dafermos_rate(k);
        for (int i = 0; i <= 400; ++i) {
            const double s = 0.05 * i;
            const KernelValues v = k.evaluate(s);
            CHECK(v.mu >= 0.0);
            CHECK(v.mu_prime <= 0.0);
            CHECK(v.mu_prime + d * v.mu <= 1e-9);
        }
        for (double s : {0.0, 0.37, 2.0, 7.5}) {
            const double tail = quad([&](double x) { return k.mu(x); }, s, 200.0 / d);
            CHECK(k.g(s) == doctest::Approx(tail).epsilon(1e-9));
        }
        CHECK(g_mass(k) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("tail_split") {
    TailSplit ts = tail_split(exp1());
    CHECK(std::abs(ts.s_star - std::log(2.0)) < 1e-10);
    CHECK(ts.mu_star(0.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(ts.mu_star(2.0 * ts.s_star) == doctest::Approx(0.25).epsilon(1e-10));
    for (const Kernel& k : {Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}}), table_of_exp(20.0, 101),
                            rescale(exp1(), 0.1)}) {
        TailSplit t = tail_split(k);
        const double head = quad([&](double s) { return k.mu(s); }, 0.0, t.s_star);
        CHECK(head == doctest::Approx(0.5 * total_mass(k)).epsilon(1e-9));
        CHECK(t.mu_star(0.5 * t.s_star) == doctest::Approx(k.mu(t.s_star)));
    }
}

TEST_CASE("rescale") {
    Kernel k = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    Kernel same = rescale(k, 1.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    for (int i = 0; i < 20; ++i) {
        const double s = U(rng);
        CHECK(same.g(s) == k.g(s));
        CHECK(same.mu(s) == k.mu(s));
        CHECK(same.mu_prime(s) == k.mu_prime(s));
    }
    CHECK(rescale(exp1(), 0.5).mu(0.0) == doctest::Approx(4.0));
    CHECK(g_mass(rescale(exp1(), 0.25)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(rescale(k, 0.0), DomainError);
    CHECK_THROWS_AS(rescale(k, 1.5), DomainError);
    auto terms = rescale(exp1(), 0.2).prony_terms();
    CHECK(terms[0].c == doctest::Approx(5.0));
    CHECK(terms[0].d == doctest::Approx(5.0));
}

TEST_CASE("table validation") {
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0, 2.0}, {1.0, 1.2, 0.5}), ValidationError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0, 1.0}, {1.0, 0.8, 0.5}), ValidationError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0}, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(Kernel::tabulated({0.5, 1.0}, {1.0, 0.5}), ValidationError);
    // a flat segment is allowed in mu but not Dafermos-admissible
    Kernel flat = Kernel::tabulated({0.0, 1.0, 2.0}, {1.0, 1.0, 0.5});
    CHECK_THROWS_AS(dafermos_rate(flat), ValidationError);
    CHECK_THROWS_AS(Kernel::exponential_sum({{1.0, -1.0}}), ValidationError);
    CHECK_THROWS_AS(flat.prony_terms(), UnsupportedError);
}

TEST_CASE("table from csv") {
    const char* path = "test_kernel_table.csv";
    {
        std::ofstream out(path);
        out.precision(17);
        out << "s,mu\n";
        for (int i = 0; i <= 200; ++i) out << 0.1 * i << "," << 2.0 * std::exp(-2.0 * 0.1 * i) << "\n";
    }
    Kernel k = Kernel::from_csv(path);
    CHECK(dafermos_rate(k) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(total_mass(k) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(k.mu(0.35) == doctest::Approx(4.0 * std::exp(-0.7)).epsilon(1e-9));
    std::remove(path);
    CHECK_THROWS_AS(Kernel::from_csv("does/not/exist.csv"), ValidationError);
}
