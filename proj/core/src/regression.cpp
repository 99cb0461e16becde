#include "alr/regression.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "alr/error.hpp"
#include "csv.hpp"

namespace alr {
namespace {

const char* kind_name(SolverKind k) {
  switch (k) {
    case SolverKind::ols: return "ols";
    case SolverKind::ridge: return "ridge";
    case SolverKind::lasso: return "lasso";
    case SolverKind::elastic_net: return "elastic_net";
  }
  return "?";
}

SolverKind kind_from_name(std::string_view name) {
  if (name == "ols") return SolverKind::ols;
  if (name == "ridge" || name == "rr") return SolverKind::ridge;
  if (name == "lasso") return SolverKind::lasso;
  if (name == "elastic_net" || name == "enet") return SolverKind::elastic_net;
  throw ConfigError("unknown solver \"" + std::string(name) + "\"");
}

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

void require_finite(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y) {
  if (!x.allFinite()) throw std::invalid_argument("fit: non-finite feature value");
  if (!y.allFinite()) throw std::invalid_argument("fit: non-finite target value");
}

// Minimum-norm least squares on centered data.
Vector least_squares(const Matrix& xc, const Vector& yc) {
  if (xc.rows() == 0 || xc.cols() == 0) return Vector::Zero(xc.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
  return cod.solve(yc);
}

struct CdResult {
  Vector beta;
  bool converged;
  int iterations;
};

// Cyclic coordinate descent on the covariance form:
//   minimize b'Gb - 2c'b + l1 ||b||_1 + l2 ||b||^2, G = Xc'Xc, c = Xc'yc.
CdResult coordinate_descent(const Matrix& gram, const Vector& xty, double l1, double l2,
                            double tol, int max_iters) {
  const Eigen::Index d = gram.rows();
  Vector beta = Vector::Zero(d);
  // grad_part(j) = c_j - sum_i G_ji b_i, kept current as b changes.
  Vector partial = xty;
  for (int iter = 1; iter <= max_iters; ++iter) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double a = gram(j, j);
      const double old = beta(j);
      const double rho = partial(j) + a * old;
      const double denom = a + l2;
      const double updated = denom > 0.0 ? soft_threshold(rho, 0.5 * l1) / denom : 0.0;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta(j) = updated;
        partial -= gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < tol) return {std::move(beta), true, iter};
  }
  return {std::move(beta), false, max_iters};
}

}  // namespace

SolverConfig SolverConfig::ols() { return SolverConfig{SolverKind::ols}; }

SolverConfig SolverConfig::ridge(double lambda) {
  SolverConfig c{SolverKind::ridge};
  c.lambda = lambda;
  return c;
}

SolverConfig SolverConfig::ridge_per_sample(double numerator) {
  SolverConfig c = ridge(numerator);
  c.lambda_per_sample = true;
  return c;
}

SolverConfig SolverConfig::lasso(double lambda) {
  SolverConfig c{SolverKind::lasso};
  c.lambda = lambda;
  return c;
}

SolverConfig SolverConfig::elastic_net(double l1, double l2) {
  SolverConfig c{SolverKind::elastic_net};
  c.lambda = l1;
  c.lambda2 = l2;
  return c;
}

SolverConfig SolverConfig::resolved(std::size_t k) const {
  if (!lambda_per_sample) return *this;
  if (k == 0) throw std::invalid_argument("cannot resolve per-sample lambda at K = 0");
  SolverConfig c = *this;
  c.lambda /= static_cast<double>(k);
  c.lambda2 /= static_cast<double>(k);
  c.lambda_per_sample = false;
  return c;
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("solver penalties must be >= 0");
  if (!(cd_tolerance > 0.0)) throw ConfigError("cd tolerance must be positive");
  if (cd_max_iters < 1) throw ConfigError("cd max iterations must be positive");
}

std::string SolverConfig::to_string() const {
  const SolverConfig defaults{};
  std::vector<std::string> knobs;
  switch (kind) {
    case SolverKind::ols: break;
    case SolverKind::ridge:
    case SolverKind::lasso:
      knobs.push_back((lambda_per_sample ? "per_k=" : "lambda=") + csv::format_double(lambda));
      break;
    case SolverKind::elastic_net:
      knobs.push_back((lambda_per_sample ? "per_k_l1=" : "l1=") + csv::format_double(lambda));
      knobs.push_back((lambda_per_sample ? "per_k_l2=" : "l2=") + csv::format_double(lambda2));
      break;
  }
  if (kind == SolverKind::lasso || kind == SolverKind::elastic_net) {
    if (cd_tolerance != defaults.cd_tolerance) {
      knobs.push_back("tol=" + csv::format_double(cd_tolerance));
    }
    if (cd_max_iters != defaults.cd_max_iters) {
      knobs.push_back("iters=" + std::to_string(cd_max_iters));
    }
  }
  std::string out = kind_name(kind);
  for (std::size_t i = 0; i < knobs.size(); ++i) out += (i ? "," : ":") + knobs[i];
  return out;
}

SolverConfig parse_solver(std::string_view text) {
  const auto colon = text.find(':');
  const SolverKind kind = kind_from_name(text.substr(0, colon));
  SolverConfig cfg;
  switch (kind) {
    case SolverKind::ols: cfg = SolverConfig::ols(); break;
    case SolverKind::ridge: cfg = SolverConfig::ridge_per_sample(10.0); break;
    case SolverKind::lasso: cfg = SolverConfig::lasso(); break;
    case SolverKind::elastic_net: cfg = SolverConfig::elastic_net(); break;
  }
  if (colon == std::string_view::npos) return cfg;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find_first_of(",;");
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("solver knob \"" + std::string(item) + "\" is not key=value");
    }
    const std::string key(item.substr(0, eq));
    const auto value = csv::parse_double(item.substr(eq + 1));
    if (!value) throw ConfigError("solver knob \"" + key + "\" has a non-numeric value");
    if (key == "lambda" || key == "l1") {
      cfg.lambda = *value;
      cfg.lambda_per_sample = false;
    } else if (key == "per_k" || key == "per_k_l1") {
      cfg.lambda = *value;
      cfg.lambda_per_sample = true;
    } else if (key == "l2" || key == "lambda2") {
      cfg.lambda2 = *value;
    } else if (key == "per_k_l2") {
      cfg.lambda2 = *value;
      cfg.lambda_per_sample = true;
    } else if (key == "tol") {
      cfg.cd_tolerance = *value;
    } else if (key == "iters") {
      cfg.cd_max_iters = static_cast<int>(*value);
    } else {
      throw ConfigError("unknown solver knob \"" + key + "\"");
    }
  }
  if (kind == SolverKind::ols && (cfg.lambda != 0.0 || cfg.lambda_per_sample)) {
    throw ConfigError("ols takes no penalty");
  }
  cfg.validate();
  return cfg;
}

LinearModel fit(const Eigen::Ref<const Matrix>& features, const Eigen::Ref<const Vector>& targets,
                const SolverConfig& cfg) {
  if (features.rows() < 1) throw std::invalid_argument("fit: need at least one sample");
  if (features.rows() != targets.size()) throw std::invalid_argument("fit: row count mismatch");
  require_finite(features, targets);
  const SolverConfig solver = cfg.resolved(static_cast<std::size_t>(features.rows()));
  solver.validate();

  const Eigen::RowVectorXd x_mean = features.colwise().mean();
  const double y_mean = targets.mean();
  const Matrix xc = features.rowwise() - x_mean;
  const Vector yc = targets.array() - y_mean;

  LinearModel model;
  model.solver = solver;
  switch (solver.kind) {
    case SolverKind::ols:
      model.coefficients = least_squares(xc, yc);
      break;
    case SolverKind::ridge:
      if (solver.lambda == 0.0) {
        model.coefficients = least_squares(xc, yc);
      } else {
        Matrix lhs = xc.transpose() * xc;
        lhs.diagonal().array() += solver.lambda;
        model.coefficients = lhs.ldlt().solve(xc.transpose() * yc);
      }
      break;
    case SolverKind::lasso:
    case SolverKind::elastic_net: {
      const double l2 = solver.kind == SolverKind::elastic_net ? solver.lambda2 : 0.0;
      auto cd = coordinate_descent(xc.transpose() * xc, xc.transpose() * yc, solver.lambda, l2,
                                   solver.cd_tolerance, solver.cd_max_iters);
      model.coefficients = std::move(cd.beta);
      model.converged = cd.converged;
      model.iterations = cd.iterations;
      break;
    }
  }
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

Vector predict(const LinearModel& model, const Eigen::Ref<const Matrix>& features) {
  if (static_cast<std::size_t>(features.cols()) != model.dims()) {
    std::ostringstream os;
    os << "predict: model has " << model.dims() << " coefficients, features have "
       << features.cols() << " columns";
    throw std::invalid_argument(os.str());
  }
  return (features * model.coefficients).array() + model.intercept;
}

double coefficient_mae(const LinearModel& a, const LinearModel& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("coefficient_mae: dimension mismatch");
  if (a.dims() == 0) return 0.0;
  return (a.coefficients - b.coefficients).cwiseAbs().mean();
}

std::string LinearModel::to_json() const {
  nlohmann::ordered_json j;
  j["coefficients"] = std::vector<double>(coefficients.data(),
                                          coefficients.data() + coefficients.size());
  j["intercept"] = intercept;
  j["solver"] = {{"kind", kind_name(solver.kind)},
                 {"lambda", solver.lambda},
                 {"lambda2", solver.lambda2},
                 {"cd_tolerance", solver.cd_tolerance},
                 {"cd_max_iters", solver.cd_max_iters},
                 {"lambda_per_sample", solver.lambda_per_sample}};
  j["converged"] = converged;
  return j.dump(2);
}

LinearModel LinearModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  LinearModel m;
  const auto coefs = j.at("coefficients").get<std::vector<double>>();
  m.coefficients = Eigen::Map<const Vector>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
  m.intercept = j.at("intercept").get<double>();
  const auto& s = j.at("solver");
  m.solver.kind = kind_from_name(s.at("kind").get<std::string>());
  m.solver.lambda = s.value("lambda", 0.0);
  m.solver.lambda2 = s.value("lambda2", 0.0);
  m.solver.cd_tolerance = s.value("cd_tolerance", 1e-6);
  m.solver.cd_max_iters = s.value("cd_max_iters", 10000);
  m.solver.lambda_per_sample = s.value("lambda_per_sample", false);
  m.converged = j.value("converged", true);
  return m;
}

}  // namespace alr
