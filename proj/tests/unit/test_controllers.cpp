#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles/smmc_toy_oracle.hpp"
#include "smmc/controllers.hpp"
#include "smmc/error.hpp"

using namespace smmc;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}
Eigen::MatrixXd col(double a, double b) {
  Eigen::MatrixXd m(2, 1);
  m << a, b;
  return m;
}
Eigen::MatrixXd row(double a, double b) {
  Eigen::MatrixXd m(1, 2);
  m << a, b;
  return m;
}

SubModel double_integrator(double k) {
  return SubModel::from_matrices(0, 0.0, mat2(0, 1, 0, 0), col(0, 1), row(1, 1), k);
}

std::vector<SubModel> toy_bank() {
  return {SubModel::from_matrices(0, 0.0, mat2(0, 1, 0, 0), col(0, 1), row(1, 1), 2.0),
          SubModel::from_matrices(1, 1.0, mat2(0, 1, -2, -3), col(0, 1), row(2, 1), 4.0)};
}

ControllerConfig sign_cfg() {
  ControllerConfig cfg;
  cfg.switch_fn = SwitchLaw::kSign;
  cfg.lambda = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("sliding_surface") {
  const SurfaceSpec c{{1.0, 2.0, 0.5}};
  const std::vector<double> zero{0, 0, 0};
  CHECK(sliding_surface(c, zero) == 0.0);
  const std::vector<double> kernel{1.0, -1.0};
  CHECK(sliding_surface(SurfaceSpec{{1.0, 1.0}}, kernel) == 0.0);
  const std::vector<double> x{2.0, 1.0, 4.0};
  CHECK(sliding_surface(c, x) == 6.0);
  const std::vector<double> short_x{1.0, 2.0};
  try {
    sliding_surface(c, short_x);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionMismatch);
  }
}

TEST_CASE("SurfaceSpec requires positive coefficients") {
  CHECK_THROWS_AS(SurfaceSpec({1.0, 0.0}).validate(), Error);
  CHECK_THROWS_AS(SurfaceSpec({-1.0, 2.0}).validate(), Error);
  CHECK_NOTHROW(SurfaceSpec({1.0, 2.0}).validate());
}

TEST_CASE("equivalent_control") {
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, -1.7);
  CHECK(equivalent_control(Eigen::MatrixXd::Zero(2, 2), col(0, 1), row(1, 1), x).isZero());
  const Eigen::VectorXd u = equivalent_control(mat2(0, 1, 0, 0), col(0, 1), row(1, 1), x);
  CHECK(u(0) == doctest::Approx(1.7));
  try {
    equivalent_control(mat2(0, 1, 0, 0), col(0, 1), row(1, 0), x);
    FAIL("expected SingularCB");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSingularCB);
  }
}

TEST_CASE("switching_control") {
  CHECK(switching_control(1.0, 2.0) == -2.0);
  CHECK(switching_control(-0.5, 3.0) == 3.0);
  CHECK(switching_control(0.0, 3.0) == 0.0);
}

TEST_CASE("saturation_control") {
  CHECK(saturation_control(5.0, 1.0, 2.0) == 1.0);
  CHECK(saturation_control(1.0, 1.0, 2.0) == 0.5);
  CHECK(saturation_control(0.0, 1.0, 2.0) == 0.0);
  CHECK(saturation_control(2.0, 1.0, 2.0) == doctest::Approx(saturation_control(2.0 - 1e-12, 1.0, 2.0)));
  CHECK(saturation_control(-2.0, 1.0, 2.0) == -1.0);
}

TEST_CASE("saturation_control is odd, bounded and continuous") {
  for (double s = -6.0; s <= 6.0; s += 0.137) {
    const double u = saturation_control(s, 1.5, 2.0);
    CHECK(saturation_control(-s, 1.5, 2.0) == -u);
    CHECK(std::abs(u) <= 1.5);
    CHECK(std::abs(saturation_control(s + 1e-9, 1.5, 2.0) - u) < 1e-8);
    if (std::abs(s) >= 2.0) CHECK(u == 1.5 * (s > 0 ? 1.0 : -1.0));
  }
}

TEST_CASE("switching_term laws") {
  CHECK(switching_term(SwitchLaw::kSign, 0.3, 4.0, 2.0, 1.0) == -8.0);
  CHECK(switching_term(SwitchLaw::kSaturation, 0.5, 4.0, 2.0, 1.0) == -4.0);
  CHECK(switching_term(SwitchLaw::kProportional, 0.5, 4.0, 2.0, 1.0) == -2.0);
}

TEST_CASE("smc1_control") {
  const SubModel model = double_integrator(2.0);
  ControllerConfig cfg = sign_cfg();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(smc1_control(model, zero, zero, cfg).u.isZero());

  const Eigen::VectorXd x = Eigen::Vector2d(0.4, -1.3);
  const Eigen::VectorXd on_surface = Eigen::Vector2d(0.7, -0.7);
  const ControlOutput on = smc1_control(model, x, on_surface, cfg);
  CHECK(on.s(0) == 0.0);
  CHECK(on.u(0) == doctest::Approx(equivalent_control(model.a, model.b, model.alpha, x)(0)));

  // s = 1, k = 2, sign: u = -x2 - 2
  const Eigen::VectorXd xt = Eigen::Vector2d(0.5, 0.5);
  const ControlOutput out = smc1_control(model, x, xt, cfg);
  CHECK(out.s(0) == 1.0);
  CHECK(out.u(0) == doctest::Approx(-x(1) - 2.0));

  cfg.equivalent_control = false;
  CHECK(smc1_control(model, x, xt, cfg).u(0) == -2.0);
}

TEST_CASE("smc1 reaching law on the nominal linear model") {
  // s sdot = -CB k |s| off the surface when the nonlinearity is zero.
  const SubModel model = double_integrator(2.0);
  const ControllerConfig cfg = sign_cfg();
  for (double a : {-2.0, -0.3, 0.4, 1.5}) {
    const Eigen::VectorXd x = Eigen::Vector2d(a, 1.0 - a);
    const ControlOutput out = smc1_control(model, x, x, cfg);
    const Eigen::VectorXd xdot = model.a * x + model.b * out.u;
    const double s = out.s(0), sdot = (model.alpha * xdot)(0);
    CHECK(s * sdot == doctest::Approx(-2.0 * std::abs(s)));
  }
}

TEST_CASE("super_twisting") {
  CHECK(super_twisting(0.0, 0.0, 1.5, 1.0, 1e-3).first == 0.0);
  CHECK(super_twisting(4.0, 0.0, 1.5, 1.0, 1e-3).first == -3.0);
  for (double s : {0.3, 2.0, 5.0}) {
    for (double w : {-1.0, 0.0, 0.7}) {
      const auto p = super_twisting(s, w, 1.5, 2.0, 1e-3);
      const auto n = super_twisting(-s, -w, 1.5, 2.0, 1e-3);
      CHECK(n.first == -p.first);
      CHECK(n.second == -p.second);
    }
  }
  // s held at 0: fixed point.
  const auto fixed = super_twisting(0.0, 0.0, 1.5, 2.0, 1e-3);
  CHECK(fixed.second == 0.0);
  const auto held = super_twisting(0.0, 0.4, 1.5, 2.0, 1e-3);
  CHECK(held.second == 0.4);
  // Integral update w <- w - W sign(s) dt
  CHECK(super_twisting(1.0, 0.0, 1.5, 2.0, 0.01).second == doctest::Approx(-0.02));
}

TEST_CASE("smc2_control threads its state") {
  ControllerConfig cfg;
  cfg.mode = ControllerMode::kSmc2;
  cfg.k = 4.0;
  CHECK(cfg.super_twisting_lambda() == doctest::Approx(3.0));
  CHECK(cfg.super_twisting_w() == doctest::Approx(4.4));
  Smc2State st{Eigen::VectorXd::Zero(2)};
  const auto [u, next] = smc2_control(Eigen::Vector2d(4.0, -1.0), st, cfg, 1e-3);
  CHECK(u(0) == doctest::Approx(-6.0));
  CHECK(u(1) == doctest::Approx(3.0));
  CHECK(next.w(0) == doctest::Approx(-4.4e-3));
  CHECK(st.w.isZero());
  cfg.st_lambda = 1.5;
  CHECK(smc2_control(Eigen::Vector2d(4.0, 0.0), st, cfg, 1e-3).first(0) == doctest::Approx(-3.0));
}

TEST_CASE("smmc_control matches the two-model hand trace") {
  namespace toy = oracle::smmc_toy;
  const auto bank = toy_bank();
  const ControllerConfig cfg = sign_cfg();
  const Eigen::VectorXd x = Eigen::Vector2d(toy::kX[0], toy::kX[1]);
  const Eigen::VectorXd xt = Eigen::Vector2d(toy::kXTilde[0], toy::kXTilde[1]);
  for (const auto& c : {toy::kHalf, toy::kSkewed}) {
    const SmmcOutput out = smmc_control(bank, ValidityVector({c.v1, c.v2}), x, xt, cfg);
    auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    CHECK(rel(out.u(0), c.u_g));
    CHECK(rel(out.fused_surface(0), c.fused_s));
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(rel(out.per_model[i].s(0), toy::kS[i]));
      CHECK(rel(out.per_model[i].u_eq(0), toy::kUEq[i]));
      CHECK(rel(out.per_model[i].u_sw(0), toy::kUSw[i]));
      CHECK(rel(out.per_model[i].u(0), toy::kU[i]));
    }
  }
}

TEST_CASE("smmc_control degenerate cases") {
  const auto bank = toy_bank();
  ControllerConfig cfg = sign_cfg();
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, -0.2);

  const std::vector<SubModel> single{bank[0]};
  const Eigen::VectorXd xt = Eigen::Vector2d(0.1, 0.6);
  const SmmcOutput one = smmc_control(single, ValidityVector({1.0}), x, xt, cfg);
  const ControlOutput smc = smc1_control(bank[0], x, xt, cfg);
  CHECK(one.u(0) == doctest::Approx(smc.u(0)).epsilon(1e-15));

  const SmmcOutput at_ref =
      smmc_control(bank, ValidityVector({0.4, 0.6}), x, Eigen::VectorXd::Zero(2), cfg);
  const double expected = 0.4 * equivalent_control(bank[0].a, bank[0].b, bank[0].alpha, x)(0) +
                          0.6 * equivalent_control(bank[1].a, bank[1].b, bank[1].alpha, x)(0);
  CHECK(at_ref.u(0) == doctest::Approx(expected).epsilon(1e-14));
  for (const auto& p : at_ref.per_model) CHECK(p.u_sw.isZero());

  CHECK_THROWS_AS(smmc_control(bank, ValidityVector({1.0}), x, xt, cfg), Error);
}

TEST_CASE("smmc_control output lies in the hull of the partial controls") {
  const auto bank = toy_bank();
  ControllerConfig cfg = sign_cfg();
  cfg.switch_fn = SwitchLaw::kSaturation;
  for (double a = -2.0; a <= 2.0; a += 0.5) {
    const Eigen::VectorXd x = Eigen::Vector2d(a, 1.0 - a * a);
    const Eigen::VectorXd xt = Eigen::Vector2d(0.5 * a, -a);
    const SmmcOutput out = smmc_control(bank, ValidityVector({0.35, 0.65}), x, xt, cfg);
    const double lo = std::min(out.per_model[0].u(0), out.per_model[1].u(0));
    const double hi = std::max(out.per_model[0].u(0), out.per_model[1].u(0));
    CHECK(out.u(0) >= lo - 1e-12);
    CHECK(out.u(0) <= hi + 1e-12);
    // Bit-identical on repetition.
    const SmmcOutput again = smmc_control(bank, ValidityVector({0.35, 0.65}), x, xt, cfg);
    CHECK(again.u(0) == out.u(0));
  }
}

TEST_CASE("ControllerConfig validation and names") {
  ControllerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.k = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.m_bound = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.omega_layer = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_controller_mode("smc2") == ControllerMode::kSmc2);
  CHECK(parse_switch_law("saturation") == SwitchLaw::kSaturation);
  CHECK_THROWS_AS(parse_controller_mode("smc3"), Error);
}
