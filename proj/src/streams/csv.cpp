#include <algorithm>
#include <unordered_set>

#include "hforest/streams.hpp"
#include "text_util.hpp"

namespace hforest {

namespace {

using detail::is_missing;
using detail::parse_real;
using detail::split_fields;

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::FileNotFound, "cannot open '" + path.string() + "'");
  return in;
}

std::size_t intern(std::unordered_map<std::string, std::size_t>& lookup, std::vector<std::string>& names,
                   std::string_view value) {
  auto [it, inserted] = lookup.try_emplace(std::string(value), names.size());
  if (inserted) names.emplace_back(value);
  return it->second;
}

bool blank(std::string_view line) { return detail::trim(line).empty(); }

}  // namespace

CsvStream::CsvStream(std::filesystem::path path, Schema schema)
    : path_(std::move(path)), schema_(std::move(schema)) {}

std::unique_ptr<CsvStream> load_csv(const std::filesystem::path& path, const CsvDeclaration& decl) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(DataErrorKind::ParseError, "missing header row", 1);

  std::vector<std::string> names;
  for (auto f : split_fields(line)) names.push_back(detail::unquote(f));
  if (!decl.expected_names.empty() && decl.expected_names != names)
    throw DataError(DataErrorKind::SchemaMismatch, "header does not match the declared column names", 1);
  {
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
      if (!seen.insert(n).second) throw DataError(DataErrorKind::SchemaMismatch, "duplicate column '" + n + "'", 1);
  }
  if (names.size() < 2) throw DataError(DataErrorKind::SchemaMismatch, "need at least one feature and a target", 1);

  std::size_t target = names.size() - 1;
  if (!decl.target.empty()) {
    auto it = std::find(names.begin(), names.end(), decl.target);
    if (it == names.end()) throw DataError(DataErrorKind::SchemaMismatch, "no target column '" + decl.target + "'", 1);
    target = static_cast<std::size_t>(it - names.begin());
  }
  for (const auto& n : decl.nominal_columns)
    if (std::find(names.begin(), names.end(), n) == names.end())
      throw DataError(DataErrorKind::SchemaMismatch, "no nominal column '" + n + "'", 1);

  std::vector<std::size_t> feature_columns;
  for (std::size_t c = 0; c < names.size(); ++c)
    if (c != target) feature_columns.push_back(c);

  // Pre-scan: column typing, category dictionaries, row count.
  const std::size_t nf = feature_columns.size();
  std::vector<std::optional<bool>> nominal(nf);
  for (std::size_t i = 0; i < nf; ++i)
    if (std::find(decl.nominal_columns.begin(), decl.nominal_columns.end(), names[feature_columns[i]]) !=
        decl.nominal_columns.end())
      nominal[i] = true;
  std::vector<std::unordered_map<std::string, std::size_t>> lookup(nf);
  std::vector<std::vector<std::string>> categories(nf);
  std::unordered_map<std::string, std::size_t> class_lookup;
  std::vector<std::string> class_names;
  const bool classification = decl.task == TaskKind::Classification;

  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != names.size())
      throw DataError(DataErrorKind::ParseError,
                      "expected " + std::to_string(names.size()) + " fields, got " + std::to_string(fields.size()),
                      line_no);
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (is_missing(fields[c]))
        throw DataError(DataErrorKind::MissingValue, "missing value in column '" + names[c] + "'", line_no, c + 1);
    for (std::size_t i = 0; i < nf; ++i) {
      const std::size_t c = feature_columns[i];
      const auto number = parse_real(fields[c]);
      if (!nominal[i]) nominal[i] = !number.has_value();
      if (*nominal[i]) {
        intern(lookup[i], categories[i], fields[c]);
      } else if (!number) {
        throw DataError(DataErrorKind::ParseError,
                        "non-numeric token '" + std::string(fields[c]) + "' in numeric column '" + names[c] + "'",
                        line_no, c + 1);
      }
    }
    if (classification) {
      intern(class_lookup, class_names, fields[target]);
    } else if (!parse_real(fields[target])) {
      throw DataError(DataErrorKind::ParseError,
                      "non-numeric target '" + std::string(fields[target]) + "'", line_no, target + 1);
    }
    ++rows;
  }

  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < nf; ++i) {
    const auto& name = names[feature_columns[i]];
    if (nominal[i].value_or(false))
      specs.push_back(FeatureSpec::nominal(name, std::max<std::size_t>(2, categories[i].size())));
    else
      specs.push_back(FeatureSpec::numeric(name));
  }
  Schema schema = classification ? Schema::classification(std::move(specs), std::max<std::size_t>(2, class_names.size()))
                                 : Schema::regression(std::move(specs));

  std::unique_ptr<CsvStream> stream(new CsvStream(path, std::move(schema)));
  stream->rows_ = rows;
  stream->target_column_ = target;
  stream->feature_columns_ = std::move(feature_columns);
  stream->categories_ = std::move(categories);
  stream->lookup_ = std::move(lookup);
  stream->class_names_ = std::move(class_names);
  stream->class_lookup_ = std::move(class_lookup);
  stream->in_ = open_or_throw(path);
  std::getline(stream->in_, line);
  stream->line_no_ = 1;
  return stream;
}

std::optional<Instance> CsvStream::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != feature_columns_.size() + 1)
      throw DataError(DataErrorKind::ParseError, "row changed since the file was scanned", line_no_);
    Instance inst;
    inst.values.resize(feature_columns_.size());
    for (std::size_t i = 0; i < feature_columns_.size(); ++i) {
      const auto field = fields[feature_columns_[i]];
      if (schema_.feature(i).is_nominal()) {
        auto it = lookup_[i].find(std::string(field));
        if (it == lookup_[i].end())
          throw DataError(DataErrorKind::ParseError, "unknown category '" + std::string(field) + "'", line_no_,
                          feature_columns_[i] + 1);
        inst.values[i] = static_cast<double>(it->second);
      } else {
        const auto v = detail::parse_real(field);
        if (!v) throw DataError(DataErrorKind::ParseError, "non-numeric token", line_no_, feature_columns_[i] + 1);
        inst.values[i] = *v;
      }
    }
    const auto tfield = fields[target_column_];
    if (schema_.is_classification()) {
      auto it = class_lookup_.find(std::string(tfield));
      if (it == class_lookup_.end())
        throw DataError(DataErrorKind::ParseError, "unknown class '" + std::string(tfield) + "'", line_no_,
                        target_column_ + 1);
      inst.target = ClassLabel{it->second};
    } else {
      const auto v = detail::parse_real(tfield);
      if (!v) throw DataError(DataErrorKind::ParseError, "non-numeric target", line_no_, target_column_ + 1);
      inst.target = *v;
    }
    return inst;
  }
  return std::nullopt;
}

}  // namespace hforest
