#include "xnlu/checkpoint.hpp"

#include <fstream>

#include "xnlu/error.hpp"

namespace xnlu {

nlohmann::json tensor_to_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", t.storage()}}; }

Tensor tensor_from_json(const nlohmann::json& j) {
  try {
    return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tensor: ") + e.what());
  } catch (const PreconditionError& e) {
    throw DataError(std::string("malformed tensor: ") + e.what());
  }
}

nlohmann::json make_checkpoint(const std::string& kind) {
  return {{"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"kind", kind}};
}

void check_checkpoint(const nlohmann::json& j, const std::string& kind) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) throw DataError("not an xnlu checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + j.value("version", nlohmann::json()).dump());
  if (j.value("kind", "") != kind)
    throw DataError("checkpoint holds a '" + j.value("kind", "") + "' model, expected '" + kind + "'");
}

void store_parameters(nlohmann::json& checkpoint, std::span<Parameter* const> params) {
  nlohmann::json& tensors = checkpoint["tensors"];
  if (tensors.is_null()) tensors = nlohmann::json::object();
  for (const Parameter* p : params) {
    require(!tensors.contains(p->name), "duplicate parameter name '" + p->name + "'");
    tensors[p->name] = tensor_to_json(p->value);
  }
}

void restore_parameters(const nlohmann::json& checkpoint, std::span<Parameter* const> params) {
  if (!checkpoint.contains("tensors")) throw DataError("checkpoint has no tensors");
  const nlohmann::json& tensors = checkpoint.at("tensors");
  for (Parameter* p : params) {
    if (!tensors.contains(p->name)) throw DataError("checkpoint is missing tensor '" + p->name + "'");
    Tensor t = tensor_from_json(tensors.at(p->name));
    if (!t.same_shape(p->value))
      throw DataError("tensor '" + p->name + "' has shape " + shape_string(t.shape()) + ", expected " +
                      shape_string(p->value.shape()));
    check_finite(t, p->name.c_str());
    p->value = std::move(t);
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump() << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace xnlu
