#include <cmath>

#include "doctest.h"
#include "rio/manifold.hpp"
#include "support/random_inputs.hpp"

using namespace rio;
using rio::testing::random_rotation;
using rio::testing::random_rotation_vector;
using rio::testing::random_unit_quat;
using rio::testing::random_vec3;

namespace {

// Independent oracle: truncated power series sum_k [phi]x^k / k!.
Mat3 exp_series(const Vec3& phi, int terms) {
  Mat3 acc = Mat3::Identity();
  Mat3 pow = Mat3::Identity();
  double fact = 1.0;
  for (int k = 1; k <= terms; ++k) {
    pow = Mat3(pow * hat(phi));
    fact *= k;
    acc += pow / fact;
  }
  return acc;
}

bool quat_close_up_to_sign(const Quat& a, const Quat& b, double tol) {
  const Vec4 ca = quat_coeffs_wxyz(a);
  const Vec4 cb = quat_coeffs_wxyz(b);
  return (ca - cb).cwiseAbs().maxCoeff() < tol || (ca + cb).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

TEST_CASE("hat basics") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));

  Mat3 expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((hat(Vec3(1, 0, 0)) - expected).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(101);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_vec3(rng, 5.0);
    const Vec3 b = random_vec3(rng, 5.0);
    CHECK((hat(a) * b - a.cross(b)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("vee roundtrip and precondition") {
  CHECK((vee(hat(Vec3(1, 2, 3))) - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK(vee(Mat3::Zero()).norm() == 0.0);

  Mat3 sym;
  sym << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  CHECK_THROWS_AS(vee(sym), std::invalid_argument);
}

TEST_CASE("exp_so3 matches power series") {
  CHECK(exp_so3(Vec3::Zero()).isIdentity(0.0));

  const Vec3 phi(M_PI / 2, 0, 0);
  CHECK((exp_so3(phi) - exp_series(phi, 20)).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(102);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_rotation_vector(rng);
    CHECK((exp_so3(p) - exp_series(p, 30)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((exp_so3(p) * exp_so3(-p)).isIdentity(1e-12));
  }
}

TEST_CASE("log_so3 roundtrips and near-pi handling") {
  CHECK(log_so3(Mat3::Identity()).norm() == 0.0);

  const Vec3 phi(0.3, -0.2, 0.1);
  CHECK((log_so3(exp_so3(phi)) - phi).norm() < 1e-10);

  // Rotation by exactly pi about z.
  const Vec3 pi_z = log_so3(exp_so3(Vec3(0, 0, M_PI)));
  CHECK(pi_z.z() > 0.0);  // nonnegative last nonzero component
  CHECK((exp_so3(pi_z) - exp_so3(Vec3(0, 0, M_PI))).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(pi_z.norm() - M_PI) < 1e-9);

  // Pi about an arbitrary axis still reproduces the rotation.
  std::mt19937_64 rng(103);
  for (int i = 0; i < 50; ++i) {
    const Vec3 axis = random_vec3(rng).normalized();
    const Mat3 r = exp_so3(axis * M_PI);
    const Vec3 back = log_so3(r);
    CHECK((exp_so3(back) - r).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(back.norm() <= M_PI + 1e-12);
  }

  for (int i = 0; i < 200; ++i) {
    const Vec3 p = random_rotation_vector(rng);
    CHECK((log_so3(exp_so3(p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("log_so3 branch switchover agreement") {
  std::mt19937_64 rng(104);
  for (int i = 0; i < 20; ++i) {
    const Vec3 axis = random_vec3(rng).normalized();
    for (double eps : {-1e-7, 1e-7}) {
      // Straddle the near-pi switch at pi - kNearPiAngle.
      const double angle = M_PI - kNearPiAngle + eps;
      const Vec3 p = axis * angle;
      CHECK((log_so3(exp_so3(p)) - p).norm() < 1e-9);
    }
    for (double eps : {-1e-7, 1e-7}) {
      const double angle = kSmallAngle + eps;
      const Vec3 p = axis * angle;
      CHECK((log_so3(exp_so3(p)) - p).norm() < 1e-12);
    }
  }
}

TEST_CASE("right jacobian definition via finite differences") {
  CHECK(right_jacobian(Vec3::Zero()).isIdentity(0.0));

  std::mt19937_64 rng(105);
  for (int i = 0; i < 30; ++i) {
    const Vec3 phi = random_rotation_vector(rng, 2.5);
    const Mat3 h = right_jacobian(phi);
    const Vec3 dir = random_vec3(rng).normalized();

    // ||Log(Exp(phi)^-1 Exp(phi+d)) - H d|| must decay quadratically in d.
    auto err = [&](double step) {
      const Vec3 d = dir * step;
      const Vec3 lhs = log_so3(exp_so3(phi).transpose() * exp_so3(phi + d));
      return (lhs - h * d).norm();
    };
    const double e1 = err(1e-3);
    const double e2 = err(5e-4);
    if (e1 > 1e-12) {  // below that we are at roundoff
      CHECK(e1 / e2 > 2.5);
      CHECK(e1 / e2 < 6.0);
    }
    CHECK(err(1e-4) / 1e-8 < 10.0);  // O(||d||^2) bound with modest constant
  }
}

TEST_CASE("right jacobian inverse closed form") {
  std::mt19937_64 rng(106);
  for (int i = 0; i < 100; ++i) {
    const Vec3 phi = random_rotation_vector(rng, 3.0);
    const Mat3 h = right_jacobian(phi);
    const Mat3 hinv = right_jacobian_inv(phi);
    CHECK((hinv - h.inverse()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((h * hinv).isIdentity(1e-10));
  }
}

TEST_CASE("quat_to_rot") {
  CHECK(quat_to_rot(Quat::Identity()).isIdentity(0.0));

  const double s = std::sqrt(2.0) / 2.0;
  const Quat qz(s, 0, 0, s);
  CHECK((quat_to_rot(qz) - exp_so3(Vec3(0, 0, M_PI / 2))).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(107);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_unit_quat(rng);
    const Quat nq(-q.w(), -q.x(), -q.y(), -q.z());
    CHECK((quat_to_rot(q) - quat_to_rot(nq)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rot_to_quat") {
  CHECK(quat_close_up_to_sign(rot_to_quat(Mat3::Identity()), Quat::Identity(), 1e-15));

  std::mt19937_64 rng(108);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation(rng);
    CHECK((quat_to_rot(rot_to_quat(r)) - r).cwiseAbs().maxCoeff() < 1e-9);
  }

  // trace = -1 case: rotation by pi about x -> (0, 1, 0, 0) up to sign.
  const Mat3 rx = exp_so3(Vec3(M_PI, 0, 0));
  CHECK(quat_close_up_to_sign(rot_to_quat(rx), Quat(0, 1, 0, 0), 1e-9));
  CHECK((quat_to_rot(rot_to_quat(rx)) - rx).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("vec_to_quat") {
  CHECK(quat_close_up_to_sign(vec_to_quat(Vec3::Zero()), Quat::Identity(), 1e-15));

  const Quat q = vec_to_quat(Vec3(0, 0, M_PI / 2));
  CHECK(std::abs(q.w() - std::cos(M_PI / 4)) < 1e-15);
  CHECK(std::abs(q.z() - std::sin(M_PI / 4)) < 1e-15);
  CHECK(std::abs(q.x()) + std::abs(q.y()) == 0.0);

  std::mt19937_64 rng(109);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 phi = random_rotation_vector(rng);
    CHECK(quat_close_up_to_sign(vec_to_quat(phi), rot_to_quat(exp_so3(phi)), 1e-10));
  }
}

TEST_CASE("quat_mul and product matrices") {
  std::mt19937_64 rng(110);
  const Quat id = Quat::Identity();
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_unit_quat(rng);
    const Quat p = random_unit_quat(rng);

    CHECK(quat_close_up_to_sign(quat_mul(q, id), q, 1e-15));
    CHECK(quat_close_up_to_sign(quat_mul(q, q.conjugate()), id, 1e-14));

    // Rotation-matrix homomorphism oracle.
    CHECK((quat_to_rot(quat_mul(q, p)) - quat_to_rot(q) * quat_to_rot(p))
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    // q o p = L(q) p = R(p) q in the w-first 4-vector layout.
    const Vec4 prod = quat_coeffs_wxyz(quat_mul(q, p));
    CHECK((left_matrix(q) * quat_coeffs_wxyz(p) - prod).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((right_matrix(p) * quat_coeffs_wxyz(q) - prod).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((left_matrix(q) * quat_coeffs_wxyz(p) - right_matrix(p) * quat_coeffs_wxyz(q))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
  CHECK(left_matrix(id).isIdentity(0.0));
  CHECK(right_matrix(id).isIdentity(0.0));
}

TEST_CASE("brc3 extracts the bottom-right block") {
  Mat4 m;
  // clang-format off
  m << 1,  2,  3,  4,
       5,  6,  7,  8,
       9, 10, 11, 12,
      13, 14, 15, 16;
  // clang-format on
  Mat3 expected;
  expected << 6, 7, 8, 10, 11, 12, 14, 15, 16;
  CHECK((brc3(m) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("retract_rotation") {
  std::mt19937_64 rng(111);
  const Quat q = random_unit_quat(rng);
  CHECK(quat_close_up_to_sign(retract_rotation(q, Vec3::Zero()), q, 1e-15));

  CHECK(quat_close_up_to_sign(retract_rotation(Quat::Identity(), Vec3(0, 0, M_PI / 2)),
                              vec_to_quat(Vec3(0, 0, M_PI / 2)), 1e-15));

  for (int i = 0; i < 50; ++i) {
    const Quat base = random_unit_quat(rng);
    const Vec3 d = random_vec3(rng).normalized() * 1e-4;
    const Quat exact = retract_rotation(base, d);
    const Quat approx = retract_rotation_approx(base, d);
    CHECK((quat_coeffs_wxyz(exact) - quat_coeffs_wxyz(approx)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("omega matrix") {
  CHECK(omega_matrix(Vec3::Zero()).isZero(0.0));

  std::mt19937_64 rng(112);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = random_vec3(rng, 3.0);
    const Mat4 om = omega_matrix(w);
    CHECK((om + om.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // 1/2 Omega(w) q equals the coefficients of q o (0, w) / 2.
    const Quat q = random_unit_quat(rng);
    const Quat qw = quat_mul(q, Quat(0.0, w.x(), w.y(), w.z()));
    const Vec4 lhs = 0.5 * (om * quat_coeffs_wxyz(q));
    const Vec4 rhs = 0.5 * quat_coeffs_wxyz(qw);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("rotation identities") {
  std::mt19937_64 rng(113);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = random_rotation(rng);
    const Vec3 phi = random_vec3(rng, 2.0);

    // [R phi]x = R [phi]x R^T and Exp(phi) R = R Exp(R^T phi).
    CHECK((hat(r * phi) - r * hat(phi) * r.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((exp_so3(phi) * r - r * exp_so3(r.transpose() * phi)).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("small disturbance composition is second order") {
  std::mt19937_64 rng(114);
  for (int i = 0; i < 30; ++i) {
    const Vec3 d1 = random_vec3(rng).normalized();
    const Vec3 d2 = random_vec3(rng).normalized();
    auto err = [&](double s) {
      return (log_so3(exp_so3(d1 * s) * exp_so3(d2 * s)) - (d1 + d2) * s).norm();
    };
    const double e1 = err(1e-3);
    const double e2 = err(5e-4);
    if (e1 > 1e-12) {
      CHECK(e1 / e2 > 2.5);
      CHECK(e1 / e2 < 6.0);
    }
  }
}

TEST_CASE("canonicalized and two_vec") {
  const Quat q(-0.5, 0.5, 0.5, 0.5);
  const Quat c = canonicalized(q);
  CHECK(c.w() == 0.5);
  CHECK(c.x() == -0.5);

  // two_vec folds the scalar sign so that r(q) == r(-q).
  std::mt19937_64 rng(115);
  for (int i = 0; i < 20; ++i) {
    const Quat a = random_unit_quat(rng);
    const Quat na(-a.w(), -a.x(), -a.y(), -a.z());
    CHECK((two_vec(a) - two_vec(na)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rigid transform group laws") {
  std::mt19937_64 rng(116);
  for (int i = 0; i < 50; ++i) {
    RigidTransform a{random_rotation(rng), random_vec3(rng, 4.0)};
    RigidTransform b{random_rotation(rng), random_vec3(rng, 4.0)};
    const Vec3 x = random_vec3(rng, 4.0);

    CHECK((a.compose(b).apply(x) - a.apply(b.apply(x))).norm() < 1e-9);
    CHECK((a.compose(a.inverse()).apply(x) - x).norm() < 1e-9);
    CHECK((a.inverse().compose(a).apply(x) - x).norm() < 1e-9);
  }
}
