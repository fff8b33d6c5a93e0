// src/nn/optim.cc

// Copyright 2026  The unitdsr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "unitdsr/nn/optim.h"

#include <algorithm>
#include <cmath>

#include "unitdsr/errors.h"

namespace unitdsr::nn {

Adam::Adam(ParameterSet* params, AdamOptions opts)
    : params_(params), opts_(opts) {}

double Adam::Step(double lr) {
  double sq = 0.0;
  for (const auto& e : params_->entries())
    if (e.var.requires_grad() && e.var.has_grad())
      sq += e.var.grad().squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip =
      (opts_.clip_norm > 0.0 && norm > opts_.clip_norm) ? opts_.clip_norm / norm
                                                        : 1.0;
  ++steps_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(steps_));
  for (auto& e : params_->entries()) {
    if (!e.var.requires_grad() || !e.var.has_grad()) continue;
    Matrix& w = e.var.mutable_value();
    auto [it, inserted] = moments_.try_emplace(e.name);
    Moments& mo = it->second;
    if (inserted) {
      mo.m = Matrix::Zero(w.rows(), w.cols());
      mo.v = Matrix::Zero(w.rows(), w.cols());
    }
    const Matrix g = e.var.grad() * clip;
    mo.m = opts_.beta1 * mo.m + (1.0 - opts_.beta1) * g;
    mo.v = opts_.beta2 * mo.v + (1.0 - opts_.beta2) * g.cwiseProduct(g);
    if (opts_.weight_decay > 0.0) w *= (1.0 - lr * opts_.weight_decay);
    w.array() -= lr * (mo.m.array() / bc1) /
                 ((mo.v.array() / bc2).sqrt() + opts_.eps);
  }
  return norm;
}

std::vector<std::pair<std::string, Matrix>> Adam::ExportState() const {
  std::vector<std::pair<std::string, Matrix>> out;
  for (const auto& [name, mo] : moments_) {
    out.emplace_back("adam.m." + name, mo.m);
    out.emplace_back("adam.v." + name, mo.v);
  }
  return out;
}

void Adam::ImportState(
    const std::vector<std::pair<std::string, Matrix>>& state, long long steps) {
  moments_.clear();
  for (const auto& [key, value] : state) {
    if (key.rfind("adam.m.", 0) == 0)
      moments_[key.substr(7)].m = value;
    else if (key.rfind("adam.v.", 0) == 0)
      moments_[key.substr(7)].v = value;
  }
  for (const auto& [name, mo] : moments_)
    if (mo.m.size() == 0 || mo.m.rows() != mo.v.rows() ||
        mo.m.cols() != mo.v.cols())
      throw CorruptFileError("incomplete optimizer state for " + name);
  steps_ = steps;
}

double WarmupLinearDecay(long long step, long long total, double peak_lr,
                         double warmup_fraction) {
  if (total <= 0) return peak_lr;
  const double warmup = std::max(1.0, warmup_fraction * static_cast<double>(total));
  const double s = static_cast<double>(step) + 1.0;
  if (s <= warmup) return peak_lr * s / warmup;
  const double remain = static_cast<double>(total) - warmup;
  if (remain <= 0.0) return peak_lr;
  return peak_lr * std::max(0.0, (static_cast<double>(total) + 1.0 - s) / (remain + 1.0));
}

}  // namespace unitdsr::nn
