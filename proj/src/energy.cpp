#include "wide/energy.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "wide/errors.hpp"

namespace wide {

namespace {

void check_dim(int dim) {
  if (dim < 1) throw InvalidParams("energy dimension must be >= 1");
}

}  // namespace

EnergyModel quadratic_energy(double lambda, int dim) {
  check_dim(dim);
  EnergyModel e;
  e.dim = dim;
  e.name = "quadratic";
  e.lambda_convexity = lambda;
  e.quadratic_matrix.assign(static_cast<size_t>(dim) * dim, 0.0);
  for (int j = 0; j < dim; ++j) e.quadratic_matrix[j * dim + j] = lambda;
  e.value = [lambda](std::span<const double> u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return 0.5 * lambda * s;
  };
  e.gradient = [lambda](std::span<const double> u, std::span<double> g) {
    for (size_t j = 0; j < u.size(); ++j) g[j] = lambda * u[j];
  };
  e.hessian = [lambda, dim](std::span<const double>, std::span<double> h) {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) h[a * dim + b] = (a == b) ? lambda : 0.0;
  };
  return e;
}

EnergyModel quadratic_energy_matrix(std::vector<double> matrix, int dim) {
  check_dim(dim);
  if (matrix.size() != static_cast<size_t>(dim) * dim) {
    throw ShapeMismatch("quadratic energy matrix must be dim*dim");
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < a; ++b) {
      const double d = matrix[a * dim + b] - matrix[b * dim + a];
      if (std::abs(d) > 1e-12 * (1.0 + std::abs(matrix[a * dim + b]))) {
        throw InvalidParams("quadratic energy matrix must be symmetric");
      }
    }
  }
  EnergyModel e;
  e.dim = dim;
  e.name = "quadratic_matrix";
  // Gershgorin lower bound on the eigenvalues.
  double bound = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) {
    double radius = 0.0;
    for (int b = 0; b < dim; ++b)
      if (b != a) radius += std::abs(matrix[a * dim + b]);
    bound = std::min(bound, matrix[a * dim + a] - radius);
  }
  e.lambda_convexity = bound;
  auto m = std::make_shared<std::vector<double>>(std::move(matrix));
  e.quadratic_matrix = *m;
  e.value = [m, dim](std::span<const double> u) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
      double row = 0.0;
      for (int b = 0; b < dim; ++b) row += (*m)[a * dim + b] * u[b];
      s += u[a] * row;
    }
    return 0.5 * s;
  };
  e.gradient = [m, dim](std::span<const double> u, std::span<double> g) {
    for (int a = 0; a < dim; ++a) {
      double row = 0.0;
      for (int b = 0; b < dim; ++b) row += (*m)[a * dim + b] * u[b];
      g[a] = row;
    }
  };
  e.hessian = [m, dim](std::span<const double>, std::span<double> h) {
    for (int a = 0; a < dim * dim; ++a) h[a] = (*m)[a];
  };
  return e;
}

EnergyModel sqrt_selection_energy() {
  EnergyModel e;
  e.dim = 1;
  e.name = "sqrt_selection";
  e.lambda_convexity = -std::numeric_limits<double>::infinity();
  e.value = [](std::span<const double> u) {
    const double up = u[0] > 0.0 ? u[0] : 0.0;
    return -(4.0 / 3.0) * up * std::sqrt(up);
  };
  e.gradient = [](std::span<const double> u, std::span<double> g) {
    const double up = u[0] > 0.0 ? u[0] : 0.0;
    g[0] = -2.0 * std::sqrt(up);
  };
  // Curvature is -1/sqrt(u+), unbounded near 0; the evaluation floor keeps
  // Newton Jacobians finite (solvers regularize the rest).
  e.hessian = [](std::span<const double> u, std::span<double> h) {
    const double up = u[0] > 1e-30 ? u[0] : 1e-30;
    h[0] = u[0] > 0.0 ? -1.0 / std::sqrt(up) : 0.0;
  };
  return e;
}

EnergyModel power_energy(double q, int dim) {
  check_dim(dim);
  if (!(q > 1.0)) throw InvalidParams("power energy requires q > 1");
  EnergyModel e;
  e.dim = dim;
  e.name = "power";
  e.lambda_convexity = 0.0;  // convex for every q > 1
  e.value = [q](std::span<const double> u) {
    double s = 0.0;
    for (double x : u) s += std::pow(std::abs(x), q) / q;
    return s;
  };
  e.gradient = [q](std::span<const double> u, std::span<double> g) {
    for (size_t j = 0; j < u.size(); ++j) {
      const double a = std::abs(u[j]);
      g[j] = a == 0.0 ? 0.0 : std::pow(a, q - 2.0) * u[j];
    }
  };
  if (q >= 2.0) {
    e.hessian = [q, dim](std::span<const double> u, std::span<double> h) {
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) h[a * dim + b] = 0.0;
        const double x = std::abs(u[a]);
        h[a * dim + a] = x == 0.0 ? 0.0 : (q - 1.0) * std::pow(x, q - 2.0);
      }
    };
  }
  return e;
}

EnergyModel double_well_energy(int dim) {
  check_dim(dim);
  EnergyModel e;
  e.dim = dim;
  e.name = "double_well";
  e.lambda_convexity = -1.0;  // E'' = 3u^2 - 1 >= -1
  e.value = [](std::span<const double> u) {
    double s = 0.0;
    for (double x : u) {
      const double w = x * x - 1.0;
      s += 0.25 * w * w;
    }
    return s;
  };
  e.gradient = [](std::span<const double> u, std::span<double> g) {
    for (size_t j = 0; j < u.size(); ++j) {
      g[j] = u[j] * (u[j] * u[j] - 1.0);
    }
  };
  e.hessian = [dim](std::span<const double> u, std::span<double> h) {
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) h[a * dim + b] = 0.0;
      h[a * dim + a] = 3.0 * u[a] * u[a] - 1.0;
    }
  };
  return e;
}

EnergyModel builtin_energy(const std::string& name,
                           const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
  };
  const int dim = static_cast<int>(get("dim", 1.0));
  if (name == "quadratic") return quadratic_energy(get("lambda", 1.0), dim);
  if (name == "sqrt_selection") return sqrt_selection_energy();
  if (name == "power") return power_energy(get("q", 2.0), dim);
  if (name == "double_well") return double_well_energy(dim);
  throw UnknownEnergy("unknown energy: " + name);
}

EnergyModel with_forcing(EnergyModel base, std::vector<double> forcing) {
  base.forcing = std::move(forcing);
  return base;
}

}  // namespace wide
