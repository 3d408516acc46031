// speval/lstm.hpp
//
// Copyright 2026 The speval authors
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
//
// Single-direction LSTM scan with exact reverse-mode gradients.
//
// Per step, with gate order (i, f, g, o) stacked in the 4h pre-activation:
//
//   a_t = W x_t + R h_{t-1} + b
//   i = sigmoid(a[0:h])   f = sigmoid(a[h:2h])
//   g = tanh(a[2h:3h])    o = sigmoid(a[3h:4h])
//   c_t = f . c_{t-1} + i . g
//   h_t = o . tanh(c_t)
//
// A reversed scan walks the sequence back to front with the same equations;
// cache columns are always indexed by the original time position.

#ifndef SPEVAL_LSTM_HPP_
#define SPEVAL_LSTM_HPP_

#include <Eigen/Core>

#include "speval/common.hpp"

namespace speval {

template <class Real>
using MatOf = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using VecOf = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using ArrOf = Eigen::Array<Real, Eigen::Dynamic, 1>;

template <class Real>
struct LstmDirCache {
  // hidden x T each; tc = tanh(c)
  MatOf<Real> i, f, g, o, c, tc, h;

  void Resize(long hidden, long T) {
    i.resize(hidden, T);
    f.resize(hidden, T);
    g.resize(hidden, T);
    o.resize(hidden, T);
    c.resize(hidden, T);
    tc.resize(hidden, T);
    h.resize(hidden, T);
  }
};

template <class Real>
ArrOf<Real> Sigmoid(const ArrOf<Real>& x) {
  return Real(1) / (Real(1) + (-x).exp());
}

/// One directional scan over X (input x T). `reverse` walks T-1 .. 0.
template <class Real>
void LstmForward(const Eigen::Ref<const MatOf<Real>>& W,
                 const Eigen::Ref<const MatOf<Real>>& R,
                 const Eigen::Ref<const VecOf<Real>>& b,
                 const MatOf<Real>& X, bool reverse,
                 LstmDirCache<Real>* cache) {
  const long hidden = R.cols();
  const long T = X.cols();
  Require(W.rows() == 4 * hidden && R.rows() == 4 * hidden && b.size() == 4 * hidden,
          "inconsistent lstm parameter shapes");
  Require(W.cols() == X.rows(), "lstm input width mismatch");
  cache->Resize(hidden, T);
  VecOf<Real> a(4 * hidden);
  const long start = reverse ? T - 1 : 0;
  const long step = reverse ? -1 : 1;
  for (long n = 0; n < T; ++n) {
    const long t = start + n * step;
    const long prev = t - step;
    const bool has_prev = n > 0;
    a = b;
    a.noalias() += W * X.col(t);
    if (has_prev) a.noalias() += R * cache->h.col(prev);
    cache->i.col(t) = Sigmoid<Real>(a.head(hidden).array()).matrix();
    cache->f.col(t) = Sigmoid<Real>(a.segment(hidden, hidden).array()).matrix();
    cache->g.col(t) = a.segment(2 * hidden, hidden).array().tanh().matrix();
    cache->o.col(t) = Sigmoid<Real>(a.tail(hidden).array()).matrix();
    cache->c.col(t) =
        cache->i.col(t).cwiseProduct(cache->g.col(t));
    if (has_prev)
      cache->c.col(t) += cache->f.col(t).cwiseProduct(cache->c.col(prev));
    cache->tc.col(t) = cache->c.col(t).array().tanh().matrix();
    cache->h.col(t) = cache->o.col(t).cwiseProduct(cache->tc.col(t));
  }
}

/// Reverse-mode pass for one directional scan. dH_ext carries dL/dh_t;
/// parameter gradients are accumulated into dW/dR/db and input gradients
/// into dX.
template <class Real>
void LstmBackward(const Eigen::Ref<const MatOf<Real>>& W,
                  const Eigen::Ref<const MatOf<Real>>& R,
                  const MatOf<Real>& X, bool reverse,
                  const LstmDirCache<Real>& cache, const MatOf<Real>& dH_ext,
                  Eigen::Ref<MatOf<Real>> dW, Eigen::Ref<MatOf<Real>> dR,
                  Eigen::Ref<VecOf<Real>> db, MatOf<Real>* dX) {
  const long hidden = R.cols();
  const long T = X.cols();
  VecOf<Real> dh_rec = VecOf<Real>::Zero(hidden);
  VecOf<Real> dc_rec = VecOf<Real>::Zero(hidden);
  VecOf<Real> da(4 * hidden);
  // iterate in the opposite order of the forward scan
  const long start = reverse ? 0 : T - 1;
  const long step = reverse ? 1 : -1;
  for (long n = 0; n < T; ++n) {
    const long t = start + n * step;
    const long prev = t + step;  // predecessor in forward-scan order
    const bool has_prev = n + 1 < T;
    const ArrOf<Real> i = cache.i.col(t).array();
    const ArrOf<Real> f = cache.f.col(t).array();
    const ArrOf<Real> g = cache.g.col(t).array();
    const ArrOf<Real> o = cache.o.col(t).array();
    const ArrOf<Real> tc = cache.tc.col(t).array();

    ArrOf<Real> dh = dH_ext.col(t).array() + dh_rec.array();
    ArrOf<Real> dc = dc_rec.array() + dh * o * (Real(1) - tc * tc);
    ArrOf<Real> do_ = dh * tc;
    ArrOf<Real> di = dc * g;
    ArrOf<Real> dg = dc * i;
    ArrOf<Real> df =
        has_prev ? ArrOf<Real>(dc * cache.c.col(prev).array())
                 : ArrOf<Real>(ArrOf<Real>::Zero(hidden));

    da.head(hidden) = (di * i * (Real(1) - i)).matrix();
    da.segment(hidden, hidden) = (df * f * (Real(1) - f)).matrix();
    da.segment(2 * hidden, hidden) = (dg * (Real(1) - g * g)).matrix();
    da.tail(hidden) = (do_ * o * (Real(1) - o)).matrix();

    dW.noalias() += da * X.col(t).transpose();
    db += da;
    if (has_prev) {
      dR.noalias() += da * cache.h.col(prev).transpose();
      dh_rec.noalias() = R.transpose() * da;
      dc_rec = (dc * f).matrix();
    }
    dX->col(t).noalias() += W.transpose() * da;
  }
}

}  // namespace speval

#endif  // SPEVAL_LSTM_HPP_
