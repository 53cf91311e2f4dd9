#include <algorithm>
#include <cctype>

#include "hforest/streams.hpp"
#include "text_util.hpp"

namespace hforest {

namespace {

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;
  std::unordered_map<std::string, std::size_t> lookup;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits "name type" where name may be quoted.
std::pair<std::string, std::string_view> split_name(std::string_view rest) {
  rest = detail::trim(rest);
  if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
    const auto close = rest.find(rest.front(), 1);
    if (close == std::string_view::npos) return {std::string(rest), {}};
    return {std::string(rest.substr(1, close - 1)), detail::trim(rest.substr(close + 1))};
  }
  const auto ws = rest.find_first_of(" \t");
  if (ws == std::string_view::npos) return {std::string(rest), {}};
  return {std::string(rest.substr(0, ws)), detail::trim(rest.substr(ws + 1))};
}

class ArffStream final : public StreamSource {
 public:
  ArffStream(Schema schema, std::vector<ArffAttribute> attrs, std::size_t target, std::ifstream in, std::size_t line_no)
      : schema_(std::move(schema)), attrs_(std::move(attrs)), target_(target), in_(std::move(in)), line_no_(line_no) {}

  const Schema& schema() const noexcept override { return schema_; }
  std::optional<std::size_t> length() const noexcept override { return std::nullopt; }

  std::optional<Instance> next() override {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto body = detail::trim(line);
      if (body.empty() || body.front() == '%') continue;
      if (body.front() == '{')
        throw DataError(DataErrorKind::UnsupportedArffFeature, "sparse rows are not supported", line_no_);
      const auto fields = detail::split_fields(body);
      if (fields.size() != attrs_.size())
        throw DataError(DataErrorKind::ParseError,
                        "expected " + std::to_string(attrs_.size()) + " values, got " + std::to_string(fields.size()),
                        line_no_);
      Instance inst;
      inst.values.reserve(attrs_.size() - 1);
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (detail::is_missing(fields[c]))
          throw DataError(DataErrorKind::MissingValue, "missing value for '" + attrs_[c].name + "'", line_no_, c + 1);
        const double v = decode(c, fields[c]);
        if (c == target_) {
          if (schema_.is_classification())
            inst.target = ClassLabel{static_cast<std::size_t>(v)};
          else
            inst.target = v;
        } else {
          inst.values.push_back(v);
        }
      }
      return inst;
    }
    return std::nullopt;
  }

 private:
  double decode(std::size_t column, std::string_view field) const {
    const auto& attr = attrs_[column];
    if (attr.nominal) {
      auto it = attr.lookup.find(detail::unquote(field));
      if (it == attr.lookup.end())
        throw DataError(DataErrorKind::ParseError, "value '" + std::string(field) + "' not declared for '" + attr.name + "'",
                        line_no_, column + 1);
      return static_cast<double>(it->second);
    }
    const auto v = detail::parse_real(field);
    if (!v)
      throw DataError(DataErrorKind::ParseError, "non-numeric token '" + std::string(field) + "'", line_no_, column + 1);
    return *v;
  }

  Schema schema_;
  std::vector<ArffAttribute> attrs_;
  std::size_t target_;
  std::ifstream in_;
  std::size_t line_no_;
};

}  // namespace

std::unique_ptr<StreamSource> load_arff(const std::filesystem::path& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::FileNotFound, "cannot open '" + path.string() + "'");

  std::vector<ArffAttribute> attrs;
  std::string line;
  std::size_t line_no = 0;
  bool in_data = false;
  while (!in_data && std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '%') continue;
    const auto keyword_end = body.find_first_of(" \t");
    const std::string keyword = lower(body.substr(0, keyword_end));
    const std::string_view rest = keyword_end == std::string_view::npos ? std::string_view{} : body.substr(keyword_end);
    if (keyword == "@relation") continue;
    if (keyword == "@data") {
      in_data = true;
      break;
    }
    if (keyword != "@attribute")
      throw DataError(DataErrorKind::ParseError, "unexpected header line '" + std::string(body) + "'", line_no);

    auto [name, type] = split_name(rest);
    ArffAttribute attr;
    attr.name = name;
    if (!type.empty() && type.front() == '{') {
      const auto close = type.rfind('}');
      if (close == std::string_view::npos)
        throw DataError(DataErrorKind::ParseError, "unterminated nominal list", line_no);
      attr.nominal = true;
      for (auto v : detail::split_fields(type.substr(1, close - 1))) {
        std::string value = detail::unquote(v);
        attr.lookup.emplace(value, attr.values.size());
        attr.values.push_back(std::move(value));
      }
    } else {
      const std::string t = lower(type);
      if (t != "numeric" && t != "real" && t != "integer")
        throw DataError(DataErrorKind::UnsupportedArffFeature,
                        "attribute '" + name + "' has unsupported type '" + std::string(type) + "'", line_no);
    }
    attrs.push_back(std::move(attr));
  }
  if (!in_data) throw DataError(DataErrorKind::ParseError, "no @data section", line_no);
  if (attrs.size() < 2) throw DataError(DataErrorKind::SchemaMismatch, "need at least one feature and a target");

  std::size_t target_index = attrs.size() - 1;
  if (!target.empty()) {
    auto it = std::find_if(attrs.begin(), attrs.end(), [&](const ArffAttribute& a) { return a.name == target; });
    if (it == attrs.end()) throw DataError(DataErrorKind::SchemaMismatch, "no attribute named '" + target + "'");
    target_index = static_cast<std::size_t>(it - attrs.begin());
  }

  std::vector<FeatureSpec> specs;
  for (std::size_t c = 0; c < attrs.size(); ++c) {
    if (c == target_index) continue;
    const auto& a = attrs[c];
    specs.push_back(a.nominal ? FeatureSpec::nominal(a.name, std::max<std::size_t>(2, a.values.size()))
                              : FeatureSpec::numeric(a.name));
  }
  const auto& t = attrs[target_index];
  Schema schema = [&] {
    try {
      return t.nominal ? Schema::classification(std::move(specs), std::max<std::size_t>(2, t.values.size()))
                       : Schema::regression(std::move(specs));
    } catch (const ConfigError& e) {
      throw DataError(DataErrorKind::SchemaMismatch, e.what());
    }
  }();
  return std::make_unique<ArffStream>(std::move(schema), std::move(attrs), target_index, std::move(in), line_no);
}

}  // namespace hforest
