#include <algorithm>
#include <numeric>

#include "hforest/streams.hpp"

namespace hforest {

namespace {

bool is_permutation_of_size(const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i)
    if (sorted[i] != i) return false;
  return true;
}

}  // namespace

DriftSpec DriftSpec::abrupt(std::size_t at) {
  DriftSpec s;
  s.kind = Kind::Abrupt;
  s.start = at;
  s.end = at;
  return s;
}

DriftSpec DriftSpec::gradual(std::size_t start, std::size_t end) {
  DriftSpec s;
  s.kind = Kind::Gradual;
  s.start = start;
  s.end = end;
  return s;
}

DriftStream::DriftStream(std::unique_ptr<StreamSource> source, DriftSpec spec, std::uint64_t rng_seed)
    : source_(std::move(source)), spec_(std::move(spec)), rng_(rng_seed) {}

void DriftStream::apply(Instance& inst) const {
  if (!spec_.class_permutation.empty() && inst.has_label())
    inst.target = ClassLabel{spec_.class_permutation[inst.label()]};
  if (!spec_.feature_permutation.empty()) {
    std::vector<double> permuted(inst.values.size());
    for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i] = inst.values[spec_.feature_permutation[i]];
    inst.values = std::move(permuted);
  }
}

std::optional<Instance> DriftStream::next() {
  auto inst = source_->next();
  if (!inst) return std::nullopt;
  const std::size_t i = index_++;
  bool transform = false;
  if (spec_.kind == DriftSpec::Kind::Abrupt) {
    transform = i >= spec_.start;
  } else if (i >= spec_.end) {
    transform = true;
  } else if (i >= spec_.start) {
    const double p = static_cast<double>(i - spec_.start) / static_cast<double>(spec_.end - spec_.start);
    transform = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
  }
  if (transform) apply(*inst);
  last_transformed_ = transform;
  return inst;
}

std::unique_ptr<DriftStream> inject_drift(std::unique_ptr<StreamSource> source, DriftSpec spec,
                                          std::uint64_t rng_seed) {
  const Schema& schema = source->schema();
  if (spec.start < 1) throw DataError(DataErrorKind::IndexOutOfRange, "drift start must be at least 1");
  if (spec.kind == DriftSpec::Kind::Gradual && !(spec.start < spec.end))
    throw DataError(DataErrorKind::IndexOutOfRange, "gradual drift needs start < end");
  if (auto n = source->length(); n && (spec.start >= *n || spec.end > *n))
    throw DataError(DataErrorKind::IndexOutOfRange,
                    "drift point " + std::to_string(spec.start) + " beyond stream length " + std::to_string(*n));
  if (!spec.class_permutation.empty()) {
    if (!schema.is_classification() || !is_permutation_of_size(spec.class_permutation, schema.class_count()))
      throw DataError(DataErrorKind::SchemaMismatch, "class permutation does not match the schema");
  }
  if (!spec.feature_permutation.empty()) {
    if (!is_permutation_of_size(spec.feature_permutation, schema.feature_count()))
      throw DataError(DataErrorKind::SchemaMismatch, "feature permutation does not match the schema");
    for (std::size_t i = 0; i < schema.feature_count(); ++i)
      if (!(schema.feature(i).kind == schema.feature(spec.feature_permutation[i]).kind &&
            schema.feature(i).category_count == schema.feature(spec.feature_permutation[i]).category_count))
        throw DataError(DataErrorKind::SchemaMismatch, "feature permutation mixes features of different kinds");
  }
  return std::make_unique<DriftStream>(std::move(source), std::move(spec), rng_seed);
}

}  // namespace hforest
