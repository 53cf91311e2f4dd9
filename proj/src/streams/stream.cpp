#include <sstream>

#include "hforest/streams.hpp"

namespace hforest {

const char* to_string(DataErrorKind kind) noexcept {
  switch (kind) {
    case DataErrorKind::FileNotFound: return "FileNotFound";
    case DataErrorKind::ParseError: return "ParseError";
    case DataErrorKind::SchemaMismatch: return "SchemaMismatch";
    case DataErrorKind::MissingValue: return "MissingValue";
    case DataErrorKind::UnsupportedArffFeature: return "UnsupportedArffFeature";
    case DataErrorKind::IndexOutOfRange: return "IndexOutOfRange";
  }
  return "?";
}

namespace {

std::string format_data_error(DataErrorKind kind, const std::string& message, std::size_t line,
                              std::size_t column) {
  std::ostringstream os;
  os << to_string(kind);
  if (line > 0) {
    os << " at line " << line;
    if (column > 0) os << ", column " << column;
  }
  os << ": " << message;
  return os.str();
}

}  // namespace

DataError::DataError(DataErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
    : Error(format_data_error(kind, message, line, column)), kind_(kind), line_(line), column_(column) {}

VectorStream::VectorStream(Schema schema, std::vector<Instance> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
  for (const auto& inst : instances_) validate_instance(schema_, inst);
}

std::optional<Instance> VectorStream::next() {
  if (pos_ >= instances_.size()) return std::nullopt;
  return instances_[pos_++];
}

std::vector<Instance> collect(StreamSource& source) {
  std::vector<Instance> out;
  if (auto n = source.length()) out.reserve(*n);
  while (auto inst = source.next()) out.push_back(std::move(*inst));
  return out;
}

}  // namespace hforest
