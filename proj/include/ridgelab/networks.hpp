#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ridgelab/activations.hpp"
#include "ridgelab/quadrature.hpp"

namespace ridgelab {

/// t * phi(<y, x> + rho)
template <typename Scalar>
struct Neuron {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Scalar coeff = Scalar(0);
  Vector weight;
  Scalar bias = Scalar(0);
};

/// t0 + sum_i t_i phi(<y_i, x> + rho_i) on R^dim.
template <typename Scalar>
class ShallowNet {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ShallowNet(int dim, Activation<Scalar> activation, Scalar constant = Scalar(0),
             std::vector<Neuron<Scalar>> neurons = {})
      : dim_(dim), activation_(std::move(activation)), constant_(constant), neurons_(std::move(neurons)) {
    if (dim < 1) throw std::invalid_argument("shallow net dimension must be positive");
    for (const auto& n : neurons_)
      if (n.weight.size() != dim) throw std::invalid_argument("neuron weight length must equal the net dimension");
  }

  int dim() const { return dim_; }
  const Activation<Scalar>& activation() const { return activation_; }
  Scalar constant() const { return constant_; }
  const std::vector<Neuron<Scalar>>& neurons() const { return neurons_; }

  /// Unchecked evaluation.
  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    Scalar sum = constant_;
    for (const auto& n : neurons_) sum += n.coeff * activation_(n.weight.dot(x) + n.bias);
    return sum;
  }

 private:
  int dim_;
  Activation<Scalar> activation_;
  Scalar constant_;
  std::vector<Neuron<Scalar>> neurons_;
};

using ShallowNetd = ShallowNet<double>;
using ShallowNetf = ShallowNet<float>;

template <typename Scalar, typename Derived>
Scalar shallow_eval(const ShallowNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != net.dim())
    throw std::invalid_argument("point has length " + std::to_string(x.size()) + ", net expects " +
                                std::to_string(net.dim()));
  return net(x);
}

template <typename Scalar>
struct AffineLayer {
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> weight;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
};

/// Affine maps with ReLU between them; the last map has no activation.
/// depth() counts the affine maps, i.e. hidden layers + 1.
template <typename Scalar>
class DeepReluNet {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  explicit DeepReluNet(std::vector<AffineLayer<Scalar>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("a deep net needs at least one layer");
    for (size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.weight.rows() != l.bias.size()) throw std::invalid_argument("layer bias length mismatch");
      if (l.weight.cols() < 1 && i == 0) throw std::invalid_argument("input dimension must be positive");
      if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows())
        throw std::invalid_argument("consecutive layer dimensions do not match at layer " + std::to_string(i));
    }
    for (auto& l : layers_) l.weight.makeCompressed();
  }

  /// Builds a net from dense (weight, bias) pairs.
  static DeepReluNet from_dense(const std::vector<std::pair<Matrix, Vector>>& dense) {
    std::vector<AffineLayer<Scalar>> layers;
    for (const auto& [w, b] : dense) layers.push_back({w.sparseView(Scalar(0), Scalar(0)), b});
    return DeepReluNet(std::move(layers));
  }

  int dim_in() const { return static_cast<int>(layers_.front().weight.cols()); }
  int dim_out() const { return static_cast<int>(layers_.back().weight.rows()); }
  int depth() const { return static_cast<int>(layers_.size()); }
  int hidden_layers() const { return depth() - 1; }
  const std::vector<AffineLayer<Scalar>>& layers() const { return layers_; }

  template <typename Derived>
  Vector forward(const Eigen::MatrixBase<Derived>& x) const {
    Vector h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
      Vector z = layers_[i].weight * h;
      z += layers_[i].bias;
      if (i + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      h = std::move(z);
    }
    return h;
  }

 private:
  std::vector<AffineLayer<Scalar>> layers_;
};

using DeepReluNetd = DeepReluNet<double>;
using DeepReluNetf = DeepReluNet<float>;

/// Scalar output of a single-output deep net.
template <typename Scalar, typename Derived>
Scalar deep_eval(const DeepReluNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != net.dim_in())
    throw std::invalid_argument("point has length " + std::to_string(x.size()) + ", net expects " +
                                std::to_string(net.dim_in()));
  if (net.dim_out() != 1) throw std::invalid_argument("deep_eval needs a single-output net");
  return net.forward(x)[0];
}

/// x -> A x + c.
template <typename Scalar>
struct AffineMap {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> linear;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> offset;

  static AffineMap translation(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& shift) {
    const auto n = shift.size();
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n), shift};
  }
  static AffineMap identity(int n) {
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n),
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n)};
  }
};

/// The ridge net x -> net1d(<y, x>): each neuron (t, a, rho) becomes (t, a y, rho).
template <typename Scalar>
ShallowNet<Scalar> lift_ridge(const ShallowNet<Scalar>& net1d, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  if (net1d.dim() != 1) throw std::invalid_argument("lift_ridge needs a one-dimensional net");
  if (y.size() < 1 || y.isZero(Scalar(0))) throw std::invalid_argument("lift_ridge needs a nonzero direction");
  std::vector<Neuron<Scalar>> lifted;
  lifted.reserve(net1d.neurons().size());
  for (const auto& n : net1d.neurons()) lifted.push_back({n.coeff, n.weight[0] * y, n.bias});
  return ShallowNet<Scalar>(static_cast<int>(y.size()), net1d.activation(), net1d.constant(), std::move(lifted));
}

/// Appends hidden layers using the identity x = ReLU(x) - ReLU(-x) until the
/// net has the requested depth. Each padded layer doubles the output width.
template <typename Scalar>
DeepReluNet<Scalar> pad_depth(const DeepReluNet<Scalar>& net, int depth) {
  if (depth < net.depth()) throw std::invalid_argument("cannot pad a net to a smaller depth");
  auto layers = net.layers();
  using Sparse = typename DeepReluNet<Scalar>::SparseMatrix;
  while (static_cast<int>(layers.size()) < depth) {
    AffineLayer<Scalar> last = layers.back();
    const auto m = last.weight.rows();
    Sparse doubled(2 * m, last.weight.cols());
    std::vector<Eigen::Triplet<Scalar>> trips;
    for (Eigen::Index r = 0; r < m; ++r)
      for (typename Sparse::InnerIterator it(last.weight, r); it; ++it) {
        trips.emplace_back(r, it.col(), it.value());
        trips.emplace_back(r + m, it.col(), -it.value());
      }
    doubled.setFromTriplets(trips.begin(), trips.end());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias(2 * m);
    bias << last.bias, -last.bias;
    layers.back() = {doubled, bias};

    Sparse unfold(m, 2 * m);
    trips.clear();
    for (Eigen::Index r = 0; r < m; ++r) {
      trips.emplace_back(r, r, Scalar(1));
      trips.emplace_back(r, r + m, Scalar(-1));
    }
    unfold.setFromTriplets(trips.begin(), trips.end());
    layers.push_back({unfold, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m)});
  }
  return DeepReluNet<Scalar>(std::move(layers));
}

/// Pointwise sum of nets with equal input and output dimensions. Shallower
/// nets are padded to the largest depth; hidden layers are placed block-diagonally.
template <typename Scalar>
DeepReluNet<Scalar> net_sum(std::span<const DeepReluNet<Scalar>> nets) {
  if (nets.empty()) throw std::invalid_argument("net_sum needs at least one net");
  int depth = 0;
  for (const auto& n : nets) {
    if (n.dim_in() != nets[0].dim_in()) throw std::invalid_argument("net_sum input dimensions differ");
    if (n.dim_out() != nets[0].dim_out()) throw std::invalid_argument("net_sum output dimensions differ");
    depth = std::max(depth, n.depth());
  }
  std::vector<DeepReluNet<Scalar>> padded;
  padded.reserve(nets.size());
  for (const auto& n : nets) padded.push_back(n.depth() == depth ? n : pad_depth(n, depth));

  using Sparse = typename DeepReluNet<Scalar>::SparseMatrix;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<AffineLayer<Scalar>> layers;
  for (int l = 0; l < depth; ++l) {
    const bool first = l == 0, last = l == depth - 1;
    Eigen::Index rows = 0, cols = 0;
    for (const auto& n : padded) {
      const auto& w = n.layers()[l].weight;
      rows = last ? w.rows() : rows + w.rows();
      cols = first ? w.cols() : cols + w.cols();
    }
    std::vector<Eigen::Triplet<Scalar>> trips;
    Vector bias = Vector::Zero(rows);
    Eigen::Index r0 = 0, c0 = 0;
    for (const auto& n : padded) {
      const auto& layer = n.layers()[l];
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        for (typename Sparse::InnerIterator it(layer.weight, r); it; ++it)
          trips.emplace_back(r0 + r, c0 + it.col(), it.value());
      bias.segment(r0, layer.bias.size()) += layer.bias;
      if (!last) r0 += layer.weight.rows();
      if (!first) c0 += layer.weight.cols();
    }
    Sparse w(rows, cols);
    w.setFromTriplets(trips.begin(), trips.end());
    layers.push_back({std::move(w), std::move(bias)});
  }
  return DeepReluNet<Scalar>(std::move(layers));
}

template <typename Scalar>
DeepReluNet<Scalar> net_sum(const DeepReluNet<Scalar>& a, const DeepReluNet<Scalar>& b) {
  const DeepReluNet<Scalar> both[] = {a, b};
  return net_sum(std::span<const DeepReluNet<Scalar>>(both));
}

/// x -> net(A x + c); depth unchanged.
template <typename Scalar>
DeepReluNet<Scalar> affine_precompose(const DeepReluNet<Scalar>& net, const AffineMap<Scalar>& map) {
  if (map.linear.rows() != net.dim_in() || map.offset.size() != net.dim_in())
    throw std::invalid_argument("affine map codomain must equal the net input dimension");
  auto layers = net.layers();
  auto& first = layers.front();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w = first.weight * map.linear;
  first.bias = first.weight * map.offset + first.bias;
  first.weight = w.sparseView(Scalar(0), Scalar(0));
  return DeepReluNet<Scalar>(std::move(layers));
}

/// t * net; only the output layer changes.
template <typename Scalar>
DeepReluNet<Scalar> scale_output(const DeepReluNet<Scalar>& net, Scalar t) {
  auto layers = net.layers();
  layers.back().weight *= t;
  layers.back().bias *= t;
  return DeepReluNet<Scalar>(std::move(layers));
}

/// A ReLU shallow net as a depth-2 deep net with the same values everywhere.
template <typename Scalar>
DeepReluNet<Scalar> shallow_to_deep(const ShallowNet<Scalar>& net) {
  if (net.activation().kind() != ActivationKind::ReLU)
    throw std::invalid_argument("shallow_to_deep needs a ReLU net");
  const auto k = static_cast<Eigen::Index>(net.neurons().size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w1(k, net.dim()), w2(1, k);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b1(k), b2(1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& n = net.neurons()[i];
    w1.row(i) = n.weight.transpose();
    b1[i] = n.bias;
    w2(0, i) = n.coeff;
  }
  b2[0] = net.constant();
  return DeepReluNet<Scalar>::from_dense({{w1, b1}, {w2, b2}});
}

/// Neuron hyperplanes <y, x> + rho = 0 of activations with a kink at 0.
inline KinkHints kink_hints(const ShallowNetd& net) {
  KinkHints hints;
  if (!net.activation().has_kink()) return hints;
  for (const auto& n : net.neurons())
    if (!n.weight.isZero(0.0) && n.coeff != 0.0) hints.planes.push_back({n.weight, n.bias});
  return hints;
}

/// First-layer creases of a deep net; deeper creases are not hyperplanes.
inline KinkHints kink_hints(const DeepReluNetd& net) {
  KinkHints hints;
  const auto& first = net.layers().front();
  for (Eigen::Index r = 0; r < first.weight.rows(); ++r) {
    Eigen::VectorXd normal = first.weight.row(r).transpose();
    if (!normal.isZero(0.0)) hints.planes.push_back({normal, first.bias[r]});
  }
  return hints;
}

/// Adapters to the quadrature integrand type.
inline Integrand as_integrand(const ShallowNetd& net) {
  return [&net](const Eigen::Ref<const Eigen::VectorXd>& x) { return net(x); };
}
inline Integrand as_integrand(const DeepReluNetd& net) {
  return [&net](const Eigen::Ref<const Eigen::VectorXd>& x) { return net.forward(x)[0]; };
}

}  // namespace ridgelab
