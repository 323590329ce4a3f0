// Copyright 2026 The qgforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense Rasch-model kernels. Everything here is templated on the scalar type
// and works on Eigen expressions; the id-keyed API lives in calibration.hpp.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace qgforge::irt {

/// P(correct | theta, b) = exp(theta - b) / (1 + exp(theta - b)).
template <typename Scalar>
Scalar rasch_prob(Scalar theta, Scalar b) {
  if (!std::isfinite(theta) || !std::isfinite(b)) {
    throw std::domain_error("rasch_prob: non-finite input");
  }
  const Scalar x = theta - b;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// log(1 / (1 + exp(-x))) without overflow.
template <typename Scalar>
Scalar log_sigmoid(Scalar x) {
  return x >= Scalar(0) ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// Discretized latent ability distribution.
template <typename Scalar>
struct Quadrature {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;  // sums to 1
};

/// Equally spaced nodes on [lower, upper] with standard-normal weights.
template <typename Scalar>
Quadrature<Scalar> normal_quadrature(int points, Scalar lower, Scalar upper) {
  if (points < 2 || !(lower < upper)) throw std::invalid_argument("normal_quadrature: bad grid");
  Quadrature<Scalar> q;
  q.nodes = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(points, lower, upper);
  q.weights = (-q.nodes.array().square() / Scalar(2)).exp().matrix();
  q.weights /= q.weights.sum();
  return q;
}

namespace detail {

// Root of a strictly decreasing f on [lo, hi] with f(lo) > 0 > f(hi).
// Newton steps that leave the bracket are halved up to five times, then the
// iteration falls back to bisection.
template <typename Scalar, typename F, typename DF>
Scalar decreasing_root(F&& f, DF&& df, Scalar lo, Scalar hi, Scalar x, Scalar tol,
                       int max_iters = 200) {
  x = std::clamp(x, lo, hi);
  for (int it = 0; it < max_iters; ++it) {
    const Scalar fx = f(x);
    if (fx == Scalar(0)) return x;
    if (fx > Scalar(0)) lo = x; else hi = x;
    const Scalar slope = df(x);
    Scalar step = slope < Scalar(0) ? -fx / slope : Scalar(0);
    Scalar next = x + step;
    int halvings = 0;
    while (step != Scalar(0) && !(next > lo && next < hi) && halvings < 5) {
      step /= Scalar(2);
      next = x + step;
      ++halvings;
    }
    if (step == Scalar(0) || !(next > lo && next < hi)) {
      next = (lo + hi) / Scalar(2);
    }
    if (std::abs(next - x) < tol || (hi - lo) < tol) return next;
    x = next;
  }
  return x;
}

}  // namespace detail

struct EmOptions {
  int quadrature_points = 61;
  double lower = -6.0;
  double upper = 6.0;
  double tol = 1e-4;
  int max_iters = 500;
};

template <typename Scalar>
struct EmResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> difficulties;
  Quadrature<Scalar> quadrature;
  int iterations = 0;
  Scalar final_delta = 0;
  bool converged = false;
  /// Marginal log-likelihood at the start of every iteration plus the final
  /// estimates; non-decreasing up to rounding.
  std::vector<Scalar> log_likelihood;
};

/// Marginal log-likelihood of a 0/1 matrix (rows respondents) under item
/// difficulties `b` and the discretized prior `q`. Also returns the
/// respondents x nodes posterior weights through `posterior` when non-null.
template <typename Derived, typename Scalar>
Scalar marginal_log_likelihood(const Eigen::MatrixBase<Derived>& responses,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                               const Quadrature<Scalar>& q,
                               Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* posterior = nullptr) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index K = q.nodes.size();
  const Eigen::Index J = b.size();
  Mat log_p(K, J), log_q(K, J);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const Scalar x = q.nodes(k) - b(j);
      log_p(k, j) = log_sigmoid(x);
      log_q(k, j) = log_sigmoid(-x);
    }
  }
  const Mat y = responses.template cast<Scalar>();
  Mat ll = y * log_p.transpose() + (Mat::Ones(y.rows(), y.cols()) - y) * log_q.transpose();
  ll.rowwise() += q.weights.array().log().matrix().transpose();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_max = ll.rowwise().maxCoeff();
  Mat h = (ll.colwise() - row_max).array().exp().matrix();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_sum = h.rowwise().sum();
  if (posterior != nullptr) {
    h.array().colwise() /= row_sum.array();
    *posterior = std::move(h);
  }
  return (row_max.array() + row_sum.array().log()).sum();
}

/// Marginal maximum likelihood item difficulties by EM over a fixed
/// quadrature grid. Item estimates depend on the data only through the
/// posterior node masses and the item's correct count, so items with equal
/// counts get bit-identical estimates.
template <typename Derived>
EmResult<typename Derived::Scalar> rasch_em(const Eigen::MatrixBase<Derived>& responses,
                                            const EmOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index N = responses.rows();
  const Eigen::Index J = responses.cols();
  if (N == 0 || J == 0) throw std::invalid_argument("rasch_em: empty response matrix");

  EmResult<Scalar> result;
  result.quadrature = normal_quadrature<Scalar>(options.quadrature_points, Scalar(options.lower),
                                                Scalar(options.upper));
  const Quadrature<Scalar>& q = result.quadrature;
  const Scalar lo = Scalar(options.lower);
  const Scalar hi = Scalar(options.upper);
  const Vec correct = responses.template cast<Scalar>().colwise().sum().transpose();

  Vec b(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const Scalar c = correct(j);
    b(j) = std::clamp(std::log((Scalar(N) - c + Scalar(0.5)) / (c + Scalar(0.5))), lo, hi);
  }

  Mat posterior;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // E-step: expected number of respondents at each node.
    result.log_likelihood.push_back(marginal_log_likelihood(responses, b, q, &posterior));
    const Vec mass = posterior.colwise().sum().transpose();

    // M-step: sum_k mass_k * P(node_k, b_j) = correct_j, one item at a time.
    Vec next(J);
    for (Eigen::Index j = 0; j < J; ++j) {
      const Scalar c = correct(j);
      auto gradient = [&](Scalar bj) {
        Scalar s = 0;
        for (Eigen::Index k = 0; k < q.nodes.size(); ++k) s += mass(k) * sigmoid(q.nodes(k) - bj);
        return s - c;
      };
      auto slope = [&](Scalar bj) {
        Scalar s = 0;
        for (Eigen::Index k = 0; k < q.nodes.size(); ++k) {
          const Scalar p = sigmoid(q.nodes(k) - bj);
          s += mass(k) * p * (Scalar(1) - p);
        }
        return -s;
      };
      if (gradient(lo) <= Scalar(0)) {
        next(j) = lo;
      } else if (gradient(hi) >= Scalar(0)) {
        next(j) = hi;
      } else {
        next(j) = detail::decreasing_root(gradient, slope, lo, hi, b(j), Scalar(1e-10));
      }
    }
    result.final_delta = (next - b).cwiseAbs().maxCoeff();
    b = next;
    result.iterations = iter;
    if (result.final_delta < Scalar(options.tol)) {
      result.converged = true;
      break;
    }
  }
  result.log_likelihood.push_back(marginal_log_likelihood(responses, b, q));
  result.difficulties = std::move(b);
  return result;
}

/// Posterior mode of one respondent's ability under a standard-normal prior.
/// `responses` and `b` cover the same items.
template <typename DerivedY, typename DerivedB>
typename DerivedB::Scalar rasch_map_ability(const Eigen::MatrixBase<DerivedY>& responses,
                                            const Eigen::MatrixBase<DerivedB>& b,
                                            typename DerivedB::Scalar tol = 1e-6) {
  using Scalar = typename DerivedB::Scalar;
  const Eigen::Index J = b.size();
  if (responses.size() != J) throw std::invalid_argument("rasch_map_ability: size mismatch");
  for (Eigen::Index j = 0; j < J; ++j) {
    if (!std::isfinite(b(j))) throw std::domain_error("rasch_map_ability: non-finite difficulty");
  }
  if (J == 0) return Scalar(0);
  const Scalar score = responses.template cast<Scalar>().sum();
  auto gradient = [&](Scalar theta) {
    Scalar s = score - theta;
    for (Eigen::Index j = 0; j < J; ++j) s -= sigmoid(theta - b(j));
    return s;
  };
  auto slope = [&](Scalar theta) {
    Scalar s = -1;
    for (Eigen::Index j = 0; j < J; ++j) {
      const Scalar p = sigmoid(theta - b(j));
      s -= p * (Scalar(1) - p);
    }
    return s;
  };
  // The root lies in [score - J, score].
  const Scalar lo = score - Scalar(J) - Scalar(1);
  const Scalar hi = score + Scalar(1);
  return detail::decreasing_root(gradient, slope, lo, hi, Scalar(0), tol);
}

}  // namespace qgforge::irt
