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

#include "fkge/kge/embedding_store.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "fkge/common/errors.h"

namespace fkge::kge {

std::string_view ModelName(ModelKind m) {
  switch (m) {
    case ModelKind::kTransE: return "TransE";
    case ModelKind::kRotatE: return "RotatE";
    case ModelKind::kDistMult: return "DistMult";
    case ModelKind::kComplEx: return "ComplEx";
  }
  return "unknown";
}

ModelKind ParseModel(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "transe") return ModelKind::kTransE;
  if (lower == "rotate") return ModelKind::kRotatE;
  if (lower == "distmult") return ModelKind::kDistMult;
  if (lower == "complex") return ModelKind::kComplEx;
  throw ArgumentError("unknown model '" + std::string(name) + "'");
}

EmbeddingStore::EmbeddingStore(ModelKind model, std::size_t n_entities,
                               std::size_t n_relations, std::size_t dim)
    : model_(model),
      dim_(dim),
      entities_(n_entities, RealWidth(model, dim)),
      relations_(n_relations, model == ModelKind::kRotatE ? dim : RealWidth(model, dim)) {
  if (dim == 0) throw ArgumentError("embedding dimension must be positive");
}

double InitBound(std::size_t real_width) {
  return 6.0 / std::sqrt(static_cast<double>(real_width));
}

EmbeddingStore EmbeddingStore::Random(ModelKind model, std::size_t n_entities,
                                      std::size_t n_relations, std::size_t dim,
                                      Rng& rng) {
  EmbeddingStore s(model, n_entities, n_relations, dim);
  const double b = InitBound(s.entity_width());
  std::uniform_real_distribution<double> u(-b, b);
  for (double& v : s.entities_.data()) v = u(rng);
  if (model == ModelKind::kRotatE) {
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (double& v : s.relations_.data()) v = phase(rng);
  } else {
    for (double& v : s.relations_.data()) v = u(rng);
  }
  return s;
}

void EmbeddingStore::RelationRow(std::size_t r, std::span<double> out) const {
  auto p = relations_.row(r);
  if (model_ == ModelKind::kRotatE) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = std::cos(p[k]);
      out[dim_ + k] = std::sin(p[k]);
    }
  } else {
    std::copy(p.begin(), p.end(), out.begin());
  }
}

Matrix EmbeddingStore::MaterializedRelations() const {
  Matrix m(relations_.rows(), entity_width());
  for (std::size_t r = 0; r < relations_.rows(); ++r) RelationRow(r, m.row(r));
  return m;
}

void EmbeddingStore::SetRelationFromMaterialized(std::size_t r,
                                                 std::span<const double> row) {
  auto p = relations_.row(r);
  if (model_ == ModelKind::kRotatE) {
    for (std::size_t k = 0; k < dim_; ++k) p[k] = std::atan2(row[dim_ + k], row[k]);
  } else {
    std::copy(row.begin(), row.end(), p.begin());
  }
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated checkpoint header", 0);
  return v;
}

void WriteHeader(std::ofstream& out, ModelKind model, std::uint64_t ne,
                 std::uint64_t nr, std::uint32_t dim) {
  out.write("FKGE", 4);
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint8_t>(out, static_cast<std::uint8_t>(model));
  Put<std::uint64_t>(out, ne);
  Put<std::uint64_t>(out, nr);
  Put<std::uint32_t>(out, dim);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(RealWidth(model, dim)));
}

void WriteDoubles(std::ofstream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace

void WriteCheckpoint(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write checkpoint " + path.string());
  WriteHeader(out, store.model(), store.num_entities(), store.num_relations(),
              static_cast<std::uint32_t>(store.dim()));
  WriteDoubles(out, store.entities().data());
  WriteDoubles(out, store.MaterializedRelations().data());
}

void WriteEntityCheckpoint(ModelKind model, std::size_t dim, const Matrix& entities,
                           const std::filesystem::path& path) {
  if (entities.cols() != RealWidth(model, dim)) {
    throw ArgumentError("entity matrix width does not match model dimension");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write checkpoint " + path.string());
  WriteHeader(out, model, entities.rows(), 0, static_cast<std::uint32_t>(dim));
  WriteDoubles(out, entities.data());
}

EmbeddingStore ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "FKGE") {
    throw ParseError("bad checkpoint magic", 0);
  }
  const auto version = Get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version", 0);
  const auto tag = Get<std::uint8_t>(in);
  if (tag > 3) throw ParseError("unknown model tag", 0);
  const auto model = static_cast<ModelKind>(tag);
  const auto ne = Get<std::uint64_t>(in);
  const auto nr = Get<std::uint64_t>(in);
  const auto dim = Get<std::uint32_t>(in);
  const auto d_real = Get<std::uint32_t>(in);
  if (d_real != RealWidth(model, dim)) throw ParseError("inconsistent d_real", 0);

  EmbeddingStore store(model, ne, nr, dim);
  auto ent = store.entities().data();
  in.read(reinterpret_cast<char*>(ent.data()),
          static_cast<std::streamsize>(ent.size() * sizeof(double)));
  Matrix rel(nr, d_real);
  auto rd = rel.data();
  in.read(reinterpret_cast<char*>(rd.data()),
          static_cast<std::streamsize>(rd.size() * sizeof(double)));
  if (!in) throw ParseError("truncated checkpoint body", 0);
  for (std::size_t r = 0; r < nr; ++r) store.SetRelationFromMaterialized(r, rel.row(r));
  return store;
}

}  // namespace fkge::kge
