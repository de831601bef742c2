#include "biclink/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace biclink {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'B', 'C', 'L', 'N', 'K', 'C', 'K', 'P'};

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((u >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(std::istream& in) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated checkpoint");
    u |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(u);
}

json config_json(const EncoderConfig& cfg) {
  return {{"num_layers", cfg.num_layers},   {"num_heads", cfg.num_heads},
          {"model_dim", cfg.model_dim},     {"ffn_dim", cfg.ffn_dim},
          {"mlp_hidden", cfg.mlp_hidden},   {"vocab_size", cfg.vocab_size},
          {"max_seq_len", cfg.max_seq_len}, {"dropout", cfg.dropout},
          {"init_std", cfg.init_std},       {"layer_norm_eps", cfg.layer_norm_eps},
          {"seed", cfg.seed}};
}

EncoderConfig config_from(const json& j) {
  EncoderConfig cfg;
  cfg.num_layers = j.at("num_layers").get<std::size_t>();
  cfg.num_heads = j.at("num_heads").get<std::size_t>();
  cfg.model_dim = j.at("model_dim").get<std::size_t>();
  cfg.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  cfg.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
  cfg.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.init_std = j.at("init_std").get<double>();
  cfg.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string config_to_json(const EncoderConfig& cfg) { return config_json(cfg).dump(); }

EncoderConfig config_from_json(const std::string& json_text) { return config_from(json::parse(json_text)); }

void round_to_float(ModelParams& params) {
  for (auto& t : params.tensors())
    for (Eigen::Index i = 0; i < t.value->size(); ++i)
      t.value->data()[i] = static_cast<double>(static_cast<float>(t.value->data()[i]));
}

void write_checkpoint(std::ostream& out, const LinkModel& model, const std::string& metadata_json) {
  json doc;
  doc["config"] = config_json(model.config);
  doc["vocab"] = model.vocab.tokens();
  doc["l_ext"] = model.l_ext;
  doc["l_int"] = model.l_int;
  doc["metadata"] = json::parse(metadata_json);
  json manifest = json::array();
  const auto tensors = model.params.tensors();
  for (const auto& t : tensors)
    manifest.push_back({{"name", t.name}, {"shape", {t.value->rows(), t.value->cols()}}});
  doc["tensors"] = std::move(manifest);
  const std::string text = doc.dump();

  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors)
    for (Eigen::Index i = 0; i < t.value->size(); ++i)
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(t.value->data()[i])));
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

void write_checkpoint(const std::filesystem::path& path, const LinkModel& model,
                      const std::string& metadata_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, model, metadata_json);
}

LinkModel read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a checkpoint file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto length = get_le<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw std::runtime_error("truncated checkpoint header");
  const json doc = json::parse(text);

  LinkModel model;
  model.config = config_from(doc.at("config"));
  model.vocab = Vocabulary(doc.at("vocab").get<std::vector<std::string>>());
  model.l_ext = doc.at("l_ext").get<std::size_t>();
  model.l_int = doc.at("l_int").get<std::size_t>();
  if (model.vocab.size() != model.config.vocab_size)
    throw std::runtime_error("checkpoint vocabulary size disagrees with its config");
  model.params = ModelParams::zeros(model.config);

  auto tensors = model.params.tensors();
  const auto& manifest = doc.at("tensors");
  if (manifest.size() != tensors.size()) throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& entry = manifest[i];
    const auto& shape = entry.at("shape");
    if (entry.at("name").get<std::string>() != tensors[i].name ||
        shape.at(0).get<Eigen::Index>() != tensors[i].value->rows() ||
        shape.at(1).get<Eigen::Index>() != tensors[i].value->cols())
      throw std::runtime_error("checkpoint tensor " + tensors[i].name + " does not match the config");
    for (Eigen::Index j = 0; j < tensors[i].value->size(); ++j)
      tensors[i].value->data()[j] = std::bit_cast<float>(get_le<std::uint32_t>(in));
  }
  return model;
}

LinkModel read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace biclink
