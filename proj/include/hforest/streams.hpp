#pragma once

// Instance sources: CSV / ARFF files read incrementally, the waveform
// generator, and concept-drift injection.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hforest/core.hpp"

namespace hforest {

enum class DataErrorKind {
  FileNotFound,
  ParseError,
  SchemaMismatch,
  MissingValue,
  UnsupportedArffFeature,
  IndexOutOfRange,
};

const char* to_string(DataErrorKind kind) noexcept;

/// Input data problem. `line` and `column` are 1-based, 0 when not applicable.
class DataError : public Error {
 public:
  DataError(DataErrorKind kind, const std::string& message, std::size_t line = 0, std::size_t column = 0);

  DataErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  DataErrorKind kind_;
  std::size_t line_;
  std::size_t column_;
};

/// Single-consumer iterator over instances that all validate against schema().
class StreamSource {
 public:
  virtual ~StreamSource() = default;

  virtual const Schema& schema() const noexcept = 0;
  /// Next instance in arrival order, nullopt at the end.
  virtual std::optional<Instance> next() = 0;
  /// Total length when known in advance.
  virtual std::optional<std::size_t> length() const noexcept = 0;
};

/// In-memory stream, mostly for tests and replays.
class VectorStream final : public StreamSource {
 public:
  VectorStream(Schema schema, std::vector<Instance> instances);

  const Schema& schema() const noexcept override { return schema_; }
  std::optional<Instance> next() override;
  std::optional<std::size_t> length() const noexcept override { return instances_.size(); }

 private:
  Schema schema_;
  std::vector<Instance> instances_;
  std::size_t pos_ = 0;
};

/// Drains a stream into memory.
std::vector<Instance> collect(StreamSource& source);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// How to read a CSV file. The first row is a header. Columns whose first
/// data value is not a number are nominal, as are columns listed in
/// `nominal_columns`; every other column must hold numbers. Nominal values
/// and class labels get dense indices by order of first appearance.
struct CsvDeclaration {
  TaskKind task = TaskKind::Regression;
  /// Target column name; the last column when empty.
  std::string target;
  std::vector<std::string> nominal_columns;
  /// When non-empty, must equal the header row.
  std::vector<std::string> expected_names;
};

class CsvStream;

/// Validates the whole file up front (types, categories, row count) and then
/// streams the rows in file order. Missing fields ("" or "?") are rejected.
std::unique_ptr<CsvStream> load_csv(const std::filesystem::path& path, const CsvDeclaration& decl);

class CsvStream final : public StreamSource {
 public:
  const Schema& schema() const noexcept override { return schema_; }
  std::optional<Instance> next() override;
  std::optional<std::size_t> length() const noexcept override { return rows_; }

  /// Category names per feature (empty for numeric features), in index order.
  const std::vector<std::vector<std::string>>& categories() const noexcept { return categories_; }
  /// Class names in index order (classification only).
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

 private:
  friend std::unique_ptr<CsvStream> load_csv(const std::filesystem::path&, const CsvDeclaration&);
  CsvStream(std::filesystem::path path, Schema schema);

  std::filesystem::path path_;
  Schema schema_;
  std::size_t rows_ = 0;
  std::size_t target_column_ = 0;
  std::vector<std::size_t> feature_columns_;
  std::vector<std::vector<std::string>> categories_;
  std::vector<std::unordered_map<std::string, std::size_t>> lookup_;  // per feature
  std::vector<std::string> class_names_;
  std::unordered_map<std::string, std::size_t> class_lookup_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

// ---------------------------------------------------------------------------
// ARFF
// ---------------------------------------------------------------------------

/// Dense ARFF with numeric (numeric / real / integer) and nominal attributes.
/// The target is the last attribute unless `target` names another one; a
/// nominal target makes a classification stream, a numeric one regression.
std::unique_ptr<StreamSource> load_arff(const std::filesystem::path& path, const std::string& target = "");

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Schema of the waveform generator: 21 numeric attributes, 3 classes.
Schema waveform_schema();

/// Classic 21-attribute waveform generator: each instance is a random convex
/// combination of two of three triangular base waves plus unit Gaussian
/// noise; the class names the pair of waves.
class WaveformStream final : public StreamSource {
 public:
  static constexpr std::size_t kAttributes = 21;
  static constexpr std::size_t kClasses = 3;

  WaveformStream(std::size_t count, std::uint64_t rng_seed);

  const Schema& schema() const noexcept override { return schema_; }
  std::optional<Instance> next() override;
  std::optional<std::size_t> length() const noexcept override { return count_; }

 private:
  Schema schema_;
  std::size_t count_;
  std::size_t emitted_ = 0;
  std::mt19937_64 rng_;
};

std::unique_ptr<StreamSource> generate_waveform(std::size_t count, std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Drift injection
// ---------------------------------------------------------------------------

/// Abrupt drift switches concept at `start`; gradual drift applies the new
/// concept with probability rising linearly from 0 at `start` to 1 at `end`.
/// Indices are 0-based stream positions, both at least 1.
struct DriftSpec {
  enum class Kind { Abrupt, Gradual };

  Kind kind = Kind::Abrupt;
  std::size_t start = 1;
  std::size_t end = 1;
  /// new class = class_permutation[old class]; empty = identity.
  std::vector<std::size_t> class_permutation;
  /// new values[i] = old values[feature_permutation[i]]; empty = identity.
  std::vector<std::size_t> feature_permutation;

  static DriftSpec abrupt(std::size_t at);
  static DriftSpec gradual(std::size_t start, std::size_t end);

  /// Position the drift is measured from (the abrupt point or gradual start).
  std::size_t drift_point() const noexcept { return start; }
};

/// Wraps `source`, applying the spec's transform from the drift point on.
class DriftStream final : public StreamSource {
 public:
  DriftStream(std::unique_ptr<StreamSource> source, DriftSpec spec, std::uint64_t rng_seed);

  const Schema& schema() const noexcept override { return source_->schema(); }
  std::optional<Instance> next() override;
  std::optional<std::size_t> length() const noexcept override { return source_->length(); }

  /// Whether the most recent instance went through the transform.
  bool last_transformed() const noexcept { return last_transformed_; }

 private:
  void apply(Instance& inst) const;

  std::unique_ptr<StreamSource> source_;
  DriftSpec spec_;
  std::mt19937_64 rng_;
  std::size_t index_ = 0;
  bool last_transformed_ = false;
};

/// Validates the spec against the source (IndexOutOfRange, SchemaMismatch
/// for permutations that are invalid or would change the schema).
std::unique_ptr<DriftStream> inject_drift(std::unique_ptr<StreamSource> source, DriftSpec spec,
                                          std::uint64_t rng_seed);

}  // namespace hforest
