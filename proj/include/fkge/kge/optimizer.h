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

#ifndef FKGE_KGE_OPTIMIZER_H_
#define FKGE_KGE_OPTIMIZER_H_

#include <cstdint>
#include <string_view>

#include "fkge/common/matrix.h"
#include "fkge/kge/embedding_store.h"
#include "fkge/kge/scoring.h"

namespace fkge::kge {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind ParseOptimizer(std::string_view name);
std::string_view OptimizerName(OptimizerKind kind);

// First-order optimizer over both matrices of an EmbeddingStore. Adam keeps
// its moments across calls, so one instance lives as long as the client.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double lr, const EmbeddingStore& store);

  void Step(EmbeddingStore& store, const DenseGradient& grad);

  OptimizerKind kind() const { return kind_; }
  double lr() const { return lr_; }
  std::int64_t steps() const { return t_; }

  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

 private:
  void Update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v);

  OptimizerKind kind_ = OptimizerKind::kSgd;
  double lr_ = 0.0;
  std::int64_t t_ = 0;
  Matrix m_ent_, v_ent_, m_rel_, v_rel_;
};

}  // namespace fkge::kge

#endif  // FKGE_KGE_OPTIMIZER_H_
