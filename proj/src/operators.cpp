#include "qmeasure/operators.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "qmeasure/errors.hpp"
#include "qmeasure/tolerances.hpp"

namespace qmeasure {

QuantumChannel::QuantumChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw ChannelError("channel needs at least one Kraus operator");
  const auto rows = kraus_.front().rows();
  const auto cols = kraus_.front().cols();
  Matrix sum = Matrix::Zero(cols, cols);
  for (const auto& k : kraus_) {
    if (k.rows() != rows || k.cols() != cols) throw ShapeError("Kraus operators differ in shape");
    if (!k.allFinite()) throw ChannelError("Kraus operator has non-finite entries");
    sum += k.adjoint() * k;
  }
  const double err = (sum - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff();
  if (err > tol::kCompleteness) {
    throw ChannelError("Kraus operators are not trace preserving (deviation " + std::to_string(err) + ")");
  }
}

QuantumChannel QuantumChannel::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return QuantumChannel({Matrix::Identity(d, d)});
}

QuantumChannel QuantumChannel::unitary(const Matrix& u) {
  if (!is_unitary(u, tol::kCompleteness)) throw UnitarityError("channel matrix is not unitary");
  return QuantumChannel({u});
}

QuantumChannel QuantumChannel::depolarizing(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ChannelError("depolarizing strength must lie in [0, 1]");
  const Complex i{0.0, 1.0};
  Matrix id = Matrix::Identity(2, 2), x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  const double a = std::sqrt(1.0 - 0.75 * p);
  const double b = std::sqrt(p / 4.0);
  return QuantumChannel({a * id, b * x, b * y, b * z});
}

QuantumChannel QuantumChannel::dephasing(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ChannelError("dephasing strength must lie in [0, 1]");
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  return QuantumChannel({std::sqrt(1.0 - p) * Matrix::Identity(2, 2), std::sqrt(p) * z});
}

Povm::Povm(std::vector<Matrix> effects, std::vector<std::string> labels)
    : effects_(std::move(effects)), labels_(std::move(labels)) {
  if (effects_.empty()) throw ShapeError("POVM needs at least one effect");
  if (labels_.empty()) {
    for (std::size_t k = 0; k < effects_.size(); ++k) labels_.push_back(std::to_string(k));
  }
  if (labels_.size() != effects_.size()) throw ShapeError("POVM label count differs from effect count");
  const auto d = effects_.front().rows();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : effects_) {
    if (e.rows() != d || e.cols() != d) throw ShapeError("POVM effects differ in shape");
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > tol::kCompleteness) {
      throw InvariantError("POVM effect is not Hermitian");
    }
    if (hermitian_eigenvalues(0.5 * (e + e.adjoint()))(0) < -tol::kEigenSlack) {
      throw InvariantError("POVM effect is not positive semidefinite");
    }
    sum += e;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol::kCompleteness) {
    throw InvariantError("POVM effects do not sum to identity");
  }
}

Povm Povm::projective(std::span<const Vector> basis, std::vector<std::string> labels) {
  std::vector<Matrix> effects;
  effects.reserve(basis.size());
  for (const auto& v : basis) effects.push_back(v * v.adjoint());
  return Povm(std::move(effects), std::move(labels));
}

Povm Povm::computational(std::size_t dim) {
  std::vector<Vector> basis;
  for (std::size_t k = 0; k < dim; ++k) {
    basis.push_back(Vector::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k)));
  }
  return projective(basis, {});
}

Povm tensor(const Povm& a, const Povm& b) {
  std::vector<Matrix> effects;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      effects.push_back(Eigen::kroneckerProduct(a.effects()[i], b.effects()[j]).eval());
      labels.push_back(a.labels()[i] + "," + b.labels()[j]);
    }
  }
  return Povm(std::move(effects), std::move(labels));
}

DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch, std::span<const std::string> on) {
  if (ch.input_dim() != ch.output_dim()) throw ShapeError("only square channels act on factors in place");
  const FactorSplit split = split_factors(rho.layout(), on);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Matrix out = Matrix::Zero(d, d);
  for (const auto& k : ch.kraus()) {
    const Matrix left = detail::apply_local_rows(rho.entries(), k, split);
    out += detail::apply_local_rows(left.adjoint(), k, split).adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(rho.layout(), std::move(out));
}

DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch,
                            std::initializer_list<std::string> on) {
  return apply_channel(rho, ch, std::span<const std::string>(on.begin(), on.size()));
}

DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch) {
  std::vector<std::string> all;
  for (const auto& f : rho.layout().factors()) all.push_back(f.label);
  return apply_channel(rho, ch, all);
}

std::vector<double> born_probabilities(const DensityMatrix& rho, const Povm& m) {
  if (m.dim() != rho.dim()) {
    throw ShapeError("POVM dimension " + std::to_string(m.dim()) + " does not match state dimension " +
                     std::to_string(rho.dim()));
  }
  std::vector<double> p;
  p.reserve(m.size());
  double total = 0.0;
  for (const auto& e : m.effects()) {
    // Tr(E rho) = sum_ij E_ij rho_ji
    const double v = (e.cwiseProduct(rho.entries().transpose())).sum().real();
    if (v < -tol::kCompleteness || v > 1.0 + tol::kCompleteness) {
      throw InvariantError("Born probability out of range: " + std::to_string(v));
    }
    p.push_back(std::clamp(v, 0.0, 1.0));
    total += p.back();
  }
  if (std::abs(total - 1.0) > tol::kProbabilitySum) {
    throw InvariantError("Born probabilities sum to " + std::to_string(total));
  }
  return p;
}

}  // namespace qmeasure
