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

#ifndef FKGE_KGE_EMBEDDING_STORE_H_
#define FKGE_KGE_EMBEDDING_STORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "fkge/common/matrix.h"
#include "fkge/common/rng.h"

namespace fkge::kge {

enum class ModelKind : std::uint8_t {
  kTransE = 0,
  kRotatE = 1,
  kDistMult = 2,
  kComplEx = 3,
};

std::string_view ModelName(ModelKind m);
ModelKind ParseModel(std::string_view name);  // throws ArgumentError

inline bool IsComplex(ModelKind m) {
  return m == ModelKind::kRotatE || m == ModelKind::kComplEx;
}
// Translational-distance models, whose score is a negated norm.
inline bool IsTranslational(ModelKind m) {
  return m == ModelKind::kTransE || m == ModelKind::kRotatE;
}

// Entity width in reals: d for real models, 2d for complex models laid out as
// [re_0..re_{d-1}, im_0..im_{d-1}].
inline std::size_t RealWidth(ModelKind m, std::size_t dim) {
  return IsComplex(m) ? 2 * dim : dim;
}

// Entity and relation embeddings of one party. RotatE relations are stored as
// phase angles (width d) so every coordinate has unit modulus by
// construction; RelationRow() materializes (cos, sin).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(ModelKind model, std::size_t n_entities, std::size_t n_relations,
                 std::size_t dim);

  // Uniform initialization in [-b, b] with b = 6 / sqrt(d_real); RotatE
  // phases uniform in [-pi, pi).
  static EmbeddingStore Random(ModelKind model, std::size_t n_entities,
                               std::size_t n_relations, std::size_t dim, Rng& rng);

  ModelKind model() const { return model_; }
  std::size_t dim() const { return dim_; }
  std::size_t entity_width() const { return RealWidth(model_, dim_); }
  std::size_t relation_param_width() const {
    return model_ == ModelKind::kRotatE ? dim_ : entity_width();
  }
  std::size_t num_entities() const { return entities_.rows(); }
  std::size_t num_relations() const { return relations_.rows(); }

  Matrix& entities() { return entities_; }
  const Matrix& entities() const { return entities_; }
  // Raw relation parameters (phases for RotatE).
  Matrix& relation_params() { return relations_; }
  const Matrix& relation_params() const { return relations_; }

  // Writes the materialized relation row (width entity_width()) into `out`.
  void RelationRow(std::size_t r, std::span<double> out) const;
  Matrix MaterializedRelations() const;
  // Inverse of RelationRow(); RotatE rows are projected to their phases.
  void SetRelationFromMaterialized(std::size_t r, std::span<const double> row);

 private:
  ModelKind model_ = ModelKind::kTransE;
  std::size_t dim_ = 0;
  Matrix entities_;
  Matrix relations_;
};

double InitBound(std::size_t real_width);

// Binary checkpoint: "FKGE" magic, u32 version, u8 model tag, u64 |E|,
// u64 |R|, u32 d, u32 d_real, then little-endian doubles, entity rows followed
// by materialized relation rows.
void WriteCheckpoint(const EmbeddingStore& store, const std::filesystem::path& path);
// Entity-only checkpoint (|R| = 0), used for protocol messages.
void WriteEntityCheckpoint(ModelKind model, std::size_t dim, const Matrix& entities,
                           const std::filesystem::path& path);
EmbeddingStore ReadCheckpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace fkge::kge

#endif  // FKGE_KGE_EMBEDDING_STORE_H_
