#include "rcm/problem_suite.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <fmt/format.h>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

constexpr double kPi = std::numbers::pi;

ProblemInstance base(std::string name, int n, bool convex) {
  ProblemInstance p;
  p.name = std::move(name);
  p.cs = build_constraints(n);
  p.x0 = Vector::Ones(n);
  p.convex = convex;
  return p;
}

// Attach f, grad, Hessian and oracle data for f = 0.5 x^T Q x + c^T x + k.
// Q is dense here; the objective itself is evaluated through the given
// O(n) callbacks.
void attach_quadratic(ProblemInstance& p, Matrix q, Vector c, double constant) {
  Matrix hess = q;
  p.hessian = [hess](const Vector&) { return hess; };
  p.quadratic = QuadraticForm{std::move(q), std::move(c), constant};
}

Vector index_weights(int n) {
  return Vector::LinSpaced(n, 1.0, static_cast<double>(n));
}

// ---- convex -----------------------------------------------------------------

ProblemInstance sphere(int n) {
  auto p = base("sphere", n, true);
  p.objective = [](const Vector& x) { return x.squaredNorm(); };
  p.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  attach_quadratic(p, 2.0 * Matrix::Identity(n, n), Vector::Zero(n), 0.0);
  return p;
}

ProblemInstance sum_squares(int n) {
  auto p = base("sum_squares", n, true);
  const Vector w = index_weights(n);
  p.objective = [w](const Vector& x) { return w.dot(x.cwiseAbs2()); };
  p.gradient = [w](const Vector& x) -> Vector { return 2.0 * w.cwiseProduct(x); };
  attach_quadratic(p, Matrix((2.0 * w).asDiagonal()), Vector::Zero(n), 0.0);
  return p;
}

ProblemInstance trid(int n) {
  auto p = base("trid", n, true);
  p.objective = [](const Vector& x) {
    const Eigen::Index n = x.size();
    return (x.array() - 1.0).square().sum() - x.head(n - 1).dot(x.tail(n - 1));
  };
  p.gradient = [](const Vector& x) -> Vector {
    const Eigen::Index n = x.size();
    Vector g = 2.0 * (x.array() - 1.0).matrix();
    g.tail(n - 1) -= x.head(n - 1);
    g.head(n - 1) -= x.tail(n - 1);
    return g;
  };
  Matrix q = 2.0 * Matrix::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    q(i, i + 1) = q(i + 1, i) = -1.0;
  }
  attach_quadratic(p, std::move(q), Vector::Constant(n, -2.0), static_cast<double>(n));
  return p;
}

ProblemInstance rotated_hyper_ellipsoid(int n) {
  // sum_i sum_{j<=i} x_j^2 = sum_j (n - j + 1) x_j^2 (1-based j).
  auto p = base("rotated_hyper_ellipsoid", n, true);
  const Vector w = Vector::LinSpaced(n, static_cast<double>(n), 1.0);
  p.objective = [w](const Vector& x) { return w.dot(x.cwiseAbs2()); };
  p.gradient = [w](const Vector& x) -> Vector { return 2.0 * w.cwiseProduct(x); };
  attach_quadratic(p, Matrix((2.0 * w).asDiagonal()), Vector::Zero(n), 0.0);
  return p;
}

ProblemInstance booth(int n) {
  auto p = base("booth", n, true);
  p.objective = [](const Vector& x) {
    const double a = x(0) + 2.0 * x(1) - 7.0;
    const double b = 2.0 * x(0) + x(1) - 5.0;
    return a * a + b * b;
  };
  p.gradient = [](const Vector& x) -> Vector {
    const double a = x(0) + 2.0 * x(1) - 7.0;
    const double b = 2.0 * x(0) + x(1) - 5.0;
    return Eigen::Vector2d(2.0 * a + 4.0 * b, 4.0 * a + 2.0 * b);
  };
  Matrix q(2, 2);
  q << 10.0, 8.0, 8.0, 10.0;
  attach_quadratic(p, std::move(q), Eigen::Vector2d(-34.0, -38.0), 74.0);
  return p;
}

ProblemInstance matyas(int n) {
  auto p = base("matyas", n, true);
  p.objective = [](const Vector& x) {
    return 0.26 * (x(0) * x(0) + x(1) * x(1)) - 0.48 * x(0) * x(1);
  };
  p.gradient = [](const Vector& x) -> Vector {
    return Eigen::Vector2d(0.52 * x(0) - 0.48 * x(1), 0.52 * x(1) - 0.48 * x(0));
  };
  Matrix q(2, 2);
  q << 0.52, -0.48, -0.48, 0.52;
  attach_quadratic(p, std::move(q), Vector::Zero(2), 0.0);
  return p;
}

ProblemInstance zakharov(int n) {
  auto p = base("zakharov", n, true);
  const Vector w = 0.5 * index_weights(n);
  p.objective = [w](const Vector& x) {
    const double s = w.dot(x);
    const double s2 = s * s;
    return x.squaredNorm() + s2 + s2 * s2;
  };
  p.gradient = [w](const Vector& x) -> Vector {
    const double s = w.dot(x);
    return 2.0 * x + (2.0 * s + 4.0 * s * s * s) * w;
  };
  p.hessian = [w](const Vector& x) -> Matrix {
    const double s = w.dot(x);
    Matrix h = (2.0 + 12.0 * s * s) * (w * w.transpose());
    h.diagonal().array() += 2.0;
    return h;
  };
  return p;
}

// Deterministic uniform [0, 1) draw: the top 53 bits of one mt19937_64 output.
double seeded_unit_draw(std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

ProblemInstance quartic_noise(int n) {
  // The noise term is drawn once per instance, so f stays smooth and the run
  // is reproducible.
  constexpr std::uint64_t kNoiseSeed = 20230101;
  auto p = base("quartic_noise", n, true);
  const Vector w = index_weights(n);
  const double noise = seeded_unit_draw(kNoiseSeed);
  p.objective = [w, noise](const Vector& x) { return w.dot(x.array().pow(4).matrix()) + noise; };
  p.gradient = [w](const Vector& x) -> Vector {
    return 4.0 * w.cwiseProduct(x.array().cube().matrix());
  };
  return p;
}

// ---- non-convex -------------------------------------------------------------

ProblemInstance rosenbrock(int n) {
  auto p = base("rosenbrock", n, false);
  p.objective = [](const Vector& x) {
    const Eigen::Index n = x.size();
    const auto head = x.head(n - 1).array();
    const auto tail = x.tail(n - 1).array();
    return (100.0 * (tail - head.square()).square() + (head - 1.0).square()).sum();
  };
  p.gradient = [](const Vector& x) -> Vector {
    const Eigen::Index n = x.size();
    Vector g = Vector::Zero(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double r = x(i + 1) - x(i) * x(i);
      g(i) += -400.0 * x(i) * r - 2.0 * (1.0 - x(i));
      g(i + 1) += 200.0 * r;
    }
    return g;
  };
  p.hessian = [](const Vector& x) -> Matrix {
    const Eigen::Index n = x.size();
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      h(i, i) += 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
      h(i + 1, i + 1) += 200.0;
      h(i, i + 1) = h(i + 1, i) = -400.0 * x(i);
    }
    return h;
  };
  return p;
}

ProblemInstance dixon_price(int n) {
  auto p = base("dixon_price", n, false);
  p.objective = [](const Vector& x) {
    double f = (x(0) - 1.0) * (x(0) - 1.0);
    for (Eigen::Index i = 1; i < x.size(); ++i) {
      const double t = 2.0 * x(i) * x(i) - x(i - 1);
      f += static_cast<double>(i + 1) * t * t;
    }
    return f;
  };
  p.gradient = [](const Vector& x) -> Vector {
    Vector g = Vector::Zero(x.size());
    g(0) = 2.0 * (x(0) - 1.0);
    for (Eigen::Index i = 1; i < x.size(); ++i) {
      const double t = 2.0 * x(i) * x(i) - x(i - 1);
      const double c = 2.0 * static_cast<double>(i + 1) * t;
      g(i) += c * 4.0 * x(i);
      g(i - 1) -= c;
    }
    return g;
  };
  return p;
}

ProblemInstance griewank(int n) {
  auto p = base("griewank", n, false);
  const Vector inv_sqrt = index_weights(n).cwiseSqrt().cwiseInverse();
  p.objective = [inv_sqrt](const Vector& x) {
    const double prod = (x.cwiseProduct(inv_sqrt)).array().cos().prod();
    return x.squaredNorm() / 4000.0 - prod + 1.0;
  };
  p.gradient = [inv_sqrt](const Vector& x) -> Vector {
    const Eigen::Index n = x.size();
    const Eigen::ArrayXd u = x.cwiseProduct(inv_sqrt).array();
    const Eigen::ArrayXd c = u.cos();
    // Products of all cosines except the i-th, via prefix and suffix products.
    Eigen::ArrayXd prefix(n), suffix(n);
    double run = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      prefix(i) = run;
      run *= c(i);
    }
    run = 1.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      suffix(i) = run;
      run *= c(i);
    }
    const Eigen::ArrayXd others = prefix * suffix;
    return (x.array() / 2000.0 + u.sin() * inv_sqrt.array() * others).matrix();
  };
  return p;
}

ProblemInstance levy(int n) {
  auto p = base("levy", n, false);
  p.objective = [](const Vector& x) {
    const Eigen::Index n = x.size();
    const Eigen::ArrayXd w = 1.0 + (x.array() - 1.0) / 4.0;
    double f = std::pow(std::sin(kPi * w(0)), 2);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double s = std::sin(kPi * w(i) + 1.0);
      f += (w(i) - 1.0) * (w(i) - 1.0) * (1.0 + 10.0 * s * s);
    }
    const double wn = w(n - 1);
    const double sn = std::sin(2.0 * kPi * wn);
    return f + (wn - 1.0) * (wn - 1.0) * (1.0 + sn * sn);
  };
  p.gradient = [](const Vector& x) -> Vector {
    const Eigen::Index n = x.size();
    const Eigen::ArrayXd w = 1.0 + (x.array() - 1.0) / 4.0;
    Vector dw = Vector::Zero(n);
    dw(0) += kPi * std::sin(2.0 * kPi * w(0));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double a = kPi * w(i) + 1.0;
      const double s = std::sin(a);
      const double e = w(i) - 1.0;
      dw(i) += 2.0 * e * (1.0 + 10.0 * s * s) + e * e * 10.0 * kPi * std::sin(2.0 * a);
    }
    const double wn = w(n - 1);
    const double en = wn - 1.0;
    const double sn = std::sin(2.0 * kPi * wn);
    dw(n - 1) += 2.0 * en * (1.0 + sn * sn) + en * en * 2.0 * kPi * std::sin(4.0 * kPi * wn);
    return dw / 4.0;
  };
  return p;
}

ProblemInstance rastrigin(int n) {
  auto p = base("rastrigin", n, false);
  p.objective = [](const Vector& x) {
    return 10.0 * static_cast<double>(x.size()) +
           (x.array().square() - 10.0 * (2.0 * kPi * x.array()).cos()).sum();
  };
  p.gradient = [](const Vector& x) -> Vector {
    return (2.0 * x.array() + 20.0 * kPi * (2.0 * kPi * x.array()).sin()).matrix();
  };
  return p;
}

constexpr double kAckleyA = 20.0;
constexpr double kAckleyB = 0.2;
constexpr double kAckleyC = 2.0 * kPi;

ProblemInstance ackley(int n) {
  auto p = base("ackley", n, false);
  p.objective = [](const Vector& x) {
    const double dn = static_cast<double>(x.size());
    const double r = std::sqrt(x.squaredNorm() / dn);
    const double cs = (kAckleyC * x.array()).cos().sum() / dn;
    return -kAckleyA * std::exp(-kAckleyB * r) - std::exp(cs) + kAckleyA + std::numbers::e;
  };
  p.gradient = [](const Vector& x) -> Vector {
    const double dn = static_cast<double>(x.size());
    const double r = std::sqrt(x.squaredNorm() / dn);
    const double cs = (kAckleyC * x.array()).cos().sum() / dn;
    Vector g = (std::exp(cs) * kAckleyC / dn) * (kAckleyC * x.array()).sin().matrix();
    if (r > 0.0) {
      g += (kAckleyA * kAckleyB * std::exp(-kAckleyB * r) / (dn * r)) * x;
    }
    return g;
  };
  return p;
}

ProblemInstance powell(int n) {
  auto p = base("powell", n, false);
  p.objective = [](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 3 < x.size(); i += 4) {
      const double a = x(i), b = x(i + 1), c = x(i + 2), d = x(i + 3);
      f += std::pow(a + 10.0 * b, 2) + 5.0 * std::pow(c - d, 2) + std::pow(b - 2.0 * c, 4) +
           10.0 * std::pow(a - d, 4);
    }
    return f;
  };
  p.gradient = [](const Vector& x) -> Vector {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i + 3 < x.size(); i += 4) {
      const double a = x(i), b = x(i + 1), c = x(i + 2), d = x(i + 3);
      const double t1 = a + 10.0 * b;
      const double t2 = c - d;
      const double t3 = std::pow(b - 2.0 * c, 3);
      const double t4 = std::pow(a - d, 3);
      g(i) = 2.0 * t1 + 40.0 * t4;
      g(i + 1) = 20.0 * t1 + 4.0 * t3;
      g(i + 2) = 10.0 * t2 - 8.0 * t3;
      g(i + 3) = -10.0 * t2 - 40.0 * t4;
    }
    return g;
  };
  return p;
}

ProblemInstance styblinski_tang(int n) {
  auto p = base("styblinski_tang", n, false);
  p.objective = [](const Vector& x) {
    const auto v = x.array();
    return 0.5 * (v.pow(4) - 16.0 * v.square() + 5.0 * v).sum();
  };
  p.gradient = [](const Vector& x) -> Vector {
    const auto v = x.array();
    return (2.0 * v.cube() - 16.0 * v + 2.5).matrix();
  };
  return p;
}

ProblemInstance schwefel(int n) {
  auto p = base("schwefel", n, false);
  p.objective = [](const Vector& x) {
    const auto v = x.array();
    return 418.9829 * static_cast<double>(x.size()) - (v * v.abs().sqrt().sin()).sum();
  };
  p.gradient = [](const Vector& x) -> Vector {
    const Eigen::ArrayXd r = x.array().abs().sqrt();
    return (-(r.sin() + 0.5 * r * r.cos())).matrix();
  };
  return p;
}

ProblemInstance beale(int n) {
  auto p = base("beale", n, false);
  p.objective = [](const Vector& v) {
    const double x = v(0), y = v(1);
    const double t1 = 1.5 - x + x * y;
    const double t2 = 2.25 - x + x * y * y;
    const double t3 = 2.625 - x + x * y * y * y;
    return t1 * t1 + t2 * t2 + t3 * t3;
  };
  p.gradient = [](const Vector& v) -> Vector {
    const double x = v(0), y = v(1);
    const double t1 = 1.5 - x + x * y;
    const double t2 = 2.25 - x + x * y * y;
    const double t3 = 2.625 - x + x * y * y * y;
    return Eigen::Vector2d(
        2.0 * (t1 * (y - 1.0) + t2 * (y * y - 1.0) + t3 * (y * y * y - 1.0)),
        2.0 * x * (t1 + 2.0 * t2 * y + 3.0 * t3 * y * y));
  };
  return p;
}

ProblemInstance three_hump_camel(int n) {
  auto p = base("three_hump_camel", n, false);
  p.objective = [](const Vector& v) {
    const double x = v(0), y = v(1);
    return 2.0 * x * x - 1.05 * std::pow(x, 4) + std::pow(x, 6) / 6.0 + x * y + y * y;
  };
  p.gradient = [](const Vector& v) -> Vector {
    const double x = v(0), y = v(1);
    return Eigen::Vector2d(4.0 * x - 4.2 * x * x * x + std::pow(x, 5) + y, x + 2.0 * y);
  };
  return p;
}

ProblemInstance six_hump_camel(int n) {
  auto p = base("six_hump_camel", n, false);
  p.objective = [](const Vector& v) {
    const double x = v(0), y = v(1);
    return (4.0 - 2.1 * x * x + std::pow(x, 4) / 3.0) * x * x + x * y +
           (-4.0 + 4.0 * y * y) * y * y;
  };
  p.gradient = [](const Vector& v) -> Vector {
    const double x = v(0), y = v(1);
    return Eigen::Vector2d(8.0 * x - 8.4 * x * x * x + 2.0 * std::pow(x, 5) + y,
                           x - 8.0 * y + 16.0 * y * y * y);
  };
  return p;
}

CatalogEntry entry(std::string name, bool convex, int default_n, bool scalable,
                   std::optional<double> table_fstar, int table_n,
                   std::function<ProblemInstance(int)> build, int n_multiple_of = 2) {
  CatalogEntry e;
  e.name = std::move(name);
  e.convex = convex;
  e.default_n = default_n;
  e.scalable = scalable;
  e.n_multiple_of = n_multiple_of;
  e.table_fstar = table_fstar;
  e.table_n = table_n;
  e.build = std::move(build);
  return e;
}

std::vector<CatalogEntry> make_catalog() {
  std::vector<CatalogEntry> c;
  c.push_back(entry("sphere", true, 1000, true, 1.67e2, 1000, sphere));
  c.push_back(entry("sum_squares", true, 1000, true, 4.08e4, 1000, sum_squares));
  c.push_back(entry("trid", true, 1000, true, 5.82e2, 1000, trid));
  c.push_back(entry("rotated_hyper_ellipsoid", true, 1000, true, 1.25e5, 1000,
                    rotated_hyper_ellipsoid));
  c.push_back(entry("booth", true, 2, false, 9.00, 2, booth));
  c.push_back(entry("matyas", true, 2, false, 0.18, 2, matyas));
  c.push_back(entry("zakharov", true, 10, true, 7.31, 10, zakharov));
  c.push_back(entry("quartic_noise", true, 1000, true, 1.01e2, 1000, quartic_noise));

  c.push_back(entry("rosenbrock", false, 1000, true, 9.26e3, 1000, rosenbrock));
  c.push_back(entry("dixon_price", false, 1000, true, 9.00e4, 1000, dixon_price));
  c.push_back(entry("griewank", false, 1000, true, 0.86, 1000, griewank));
  c.push_back(entry("levy", false, 1000, true, 71.06, 1000, levy));
  c.push_back(entry("rastrigin", false, 1000, true, 2.93e3, 1000, rastrigin));
  c.push_back(entry("ackley", false, 1000, true, 2.64, 1000, ackley));
  c.push_back(entry("powell", false, 1000, true, 4.26e3, 1000, powell, 4));
  c.push_back(entry("styblinski_tang", false, 1000, true, -9.61e3, 1000, styblinski_tang));
  c.push_back(entry("schwefel", false, 1000, true, 4.19e5, 1000, schwefel));
  c.push_back(entry("beale", false, 2, false, 3.35, 2, beale));
  c.push_back(entry("three_hump_camel", false, 2, false, 0.55, 2, three_hump_camel));
  c.push_back(entry("six_hump_camel", false, 2, false, 0.74, 2, six_hump_camel));
  return c;
}

}  // namespace

ConstraintSystem build_constraints(int n, RowFraction rows) {
  int num = 1;
  int den = 2;
  switch (rows) {
    case RowFraction::Half:
      break;
    case RowFraction::Third:
      den = 3;
      break;
    case RowFraction::TwoThirds:
      num = 2;
      den = 3;
      break;
  }
  if (n < 2 || n % den != 0) {
    throw DimensionError(fmt::format("constraint builder needs n >= 2 divisible by {}, got {}", den, n));
  }
  const int m = n / den * num;

  ConstraintSystem cs;
  cs.A = Matrix::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    cs.A(i, i) = 2.0;
    if (i > 0) cs.A(i, i - 1) = 1.0;
    if (i + 1 < m) cs.A(i, i + 1) = 1.0;
    cs.A.row(i).tail(n - m).setConstant(i % 2 == 0 ? 1.0 : 2.0);
  }
  cs.b = Vector::Constant(m, 2.0);
  return cs;
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = make_catalog();
  return entries;
}

const CatalogEntry& find_problem(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) {
      return e;
    }
  }
  throw UnknownProblem(fmt::format("unknown problem '{}'", name));
}

ProblemInstance make_problem(std::string_view name, std::optional<int> n) {
  const CatalogEntry& e = find_problem(name);
  const int dim = n.value_or(e.default_n);
  if (!e.scalable && dim != e.default_n) {
    throw DimensionError(fmt::format("problem '{}' is fixed at n = {}", e.name, e.default_n));
  }
  if (dim < 2 || dim % e.n_multiple_of != 0) {
    throw DimensionError(
        fmt::format("problem '{}' needs n divisible by {}, got {}", e.name, e.n_multiple_of, dim));
  }
  ProblemInstance p = e.build(dim);
  if (e.table_fstar && dim == e.table_n) {
    p.known_fstar = e.table_fstar;
    p.fstar_source = "paper table";
  }
  return p;
}

QuadraticSolution quadratic_oracle(const ConstraintSystem& cs, const Matrix& q, const Vector& c) {
  cs.validate();
  const Eigen::Index m = cs.rows();
  const Eigen::Index n = cs.cols();
  if (q.rows() != n || q.cols() != n || c.size() != n) {
    throw DimensionError("quadratic_oracle: Q and c do not match the constraint width");
  }

  // A^T = [Y | Z] [R; 0]. Feasible points are Y R^{-T} b + Z w.
  const Eigen::HouseholderQR<Matrix> qr(cs.A.transpose());
  const Matrix full_q = qr.householderQ();
  const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const double r_scale = r.diagonal().cwiseAbs().maxCoeff();
  if (!(r.diagonal().cwiseAbs().minCoeff() > 1e-13 * r_scale)) {
    throw SingularKkt("quadratic_oracle: constraint matrix is rank deficient");
  }
  const Vector y = r.transpose().triangularView<Eigen::Lower>().solve(cs.b);
  const Vector x_part = full_q.leftCols(m) * y;

  QuadraticSolution out;
  if (m == n) {
    out.x_star = x_part;
  } else {
    const Matrix z = full_q.rightCols(n - m);
    const Matrix reduced = z.transpose() * q * z;
    const Eigen::LLT<Matrix> llt(reduced);
    if (llt.info() != Eigen::Success) {
      throw SingularKkt("quadratic_oracle: reduced Hessian is not positive definite");
    }
    const Vector w = llt.solve(-(z.transpose() * (q * x_part + c)));
    out.x_star = x_part + z * w;
  }
  out.f_star = 0.5 * out.x_star.dot(q * out.x_star) + c.dot(out.x_star);
  return out;
}

}  // namespace rcm
