#include "temprel/checkpoint.hpp"

#include <fstream>
#include <map>

#include "temprel/error.hpp"

namespace temprel::nn {

using nlohmann::json;

json parameters_to_json(std::span<const Parameter* const> params) {
  json arr = json::array();
  for (const Parameter* p : params) {
    arr.push_back({{"name", p->name},
                   {"shape", p->value.shape()},
                   {"values", std::vector<double>(p->value.data().begin(), p->value.data().end())}});
  }
  return arr;
}

void parameters_from_json(const json& array, std::span<Parameter* const> params) {
  std::map<std::string, const json*> by_name;
  if (!array.is_array()) throw DataError(DataErrorKind::Schema, "checkpoint parameters must be an array");
  for (const auto& entry : array) by_name[entry.at("name").get<std::string>()] = &entry;
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end())
      throw DataError(DataErrorKind::Schema, "checkpoint lacks parameter '" + p->name + "'");
    const auto shape = it->second->at("shape").get<std::vector<std::size_t>>();
    if (shape != p->value.shape())
      throw DataError(DataErrorKind::DimensionMismatch,
                      "checkpoint parameter '" + p->name + "' has a different shape");
    const auto values = it->second->at("values").get<std::vector<double>>();
    if (values.size() != p->value.size())
      throw DataError(DataErrorKind::DimensionMismatch,
                      "checkpoint parameter '" + p->name + "' has wrong value count");
    std::copy(values.begin(), values.end(), p->value.data().begin());
    p->grad = Tensor(p->value.shape());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot write '" + path.string() + "'");
  out << j.dump(indent) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(DataErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace temprel::nn
