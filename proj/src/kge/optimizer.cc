/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fkge/kge/optimizer.h"

#include <cmath>
#include <string>

#include "fkge/common/errors.h"

namespace fkge::kge {

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "sgd" || name == "SGD") return OptimizerKind::kSgd;
  if (name == "adam" || name == "Adam") return OptimizerKind::kAdam;
  throw ArgumentError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

Optimizer::Optimizer(OptimizerKind kind, double lr, const EmbeddingStore& store)
    : kind_(kind), lr_(lr) {
  if (lr < 0.0) throw ArgumentError("learning rate must be >= 0");
  if (kind == OptimizerKind::kAdam) {
    m_ent_ = Matrix(store.num_entities(), store.entity_width());
    v_ent_ = m_ent_;
    m_rel_ = Matrix(store.num_relations(), store.relation_param_width());
    v_rel_ = m_rel_;
  }
}

void Optimizer::Step(EmbeddingStore& store, const DenseGradient& grad) {
  ++t_;
  Update(store.entities(), grad.entities, m_ent_, v_ent_);
  Update(store.relation_params(), grad.relations, m_rel_, v_rel_);
}

void Optimizer::Update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v) {
  if (lr_ == 0.0) return;
  auto p = param.data();
  auto g = grad.data();
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
    return;
  }
  auto md = m.data();
  auto vd = v.data();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < p.size(); ++i) {
    md[i] = beta1 * md[i] + (1.0 - beta1) * g[i];
    vd[i] = beta2 * vd[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr_ * (md[i] / c1) / (std::sqrt(vd[i] / c2) + eps);
  }
}

}  // namespace fkge::kge
