#include "topicfuse/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "topicfuse/encoder.hpp"
#include "topicfuse/errors.hpp"

namespace topicfuse {

namespace {

constexpr char kMagic[8] = {'T', 'F', 'C', 'K', 'P', 'T', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof(bits));
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xFF));
  }
}

// Sequential reader over the whole file, throwing ParseError on truncation.
struct Reader {
  const std::string& bytes;
  const std::string& path;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (bytes.size() - pos < n) {
      throw Error(ErrorKind::ParseError, path + ": truncated checkpoint");
    }
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int shift = 0; shift < 32; shift += 8) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos++])) << shift;
    }
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int shift = 0; shift < 64; shift += 8) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos++])) << shift;
    }
    double d = 0.0;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open checkpoint: " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

struct ParsedCheckpoint {
  std::vector<CheckpointEntry> manifest;
  std::vector<std::vector<double>> values;
};

ParsedCheckpoint parse_checkpoint(const std::string& path, bool with_values) {
  const std::string bytes = read_file(path);
  Reader r{bytes, path};
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorKind::ParseError, path + ": not a parameter checkpoint");
  }
  const std::uint32_t count = r.u32();

  ParsedCheckpoint out;
  out.manifest.reserve(count);
  std::size_t total_values = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = r.str(r.u32());
    e.rows = static_cast<int>(r.u32());
    e.cols = static_cast<int>(r.u32());
    total_values += static_cast<std::size_t>(e.rows) * static_cast<std::size_t>(e.cols);
    out.manifest.push_back(std::move(e));
  }
  if (!with_values) return out;

  out.values.reserve(count);
  for (const CheckpointEntry& e : out.manifest) {
    std::vector<double> v(static_cast<std::size_t>(e.rows) * static_cast<std::size_t>(e.cols));
    for (double& x : v) x = r.f64();
    out.values.push_back(std::move(v));
  }
  if (r.pos != bytes.size()) {
    throw Error(ErrorKind::ParseError, path + ": trailing bytes after parameter values");
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<Param*>& params) {
  std::string bytes(kMagic, sizeof(kMagic));
  if (params.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::IoError, "too many parameters for checkpoint format");
  }
  put_u32(bytes, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    put_u32(bytes, static_cast<std::uint32_t>(p->name.size()));
    bytes += p->name;
    put_u32(bytes, static_cast<std::uint32_t>(p->value.rows));
    put_u32(bytes, static_cast<std::uint32_t>(p->value.cols));
  }
  for (const Param* p : params) {
    for (double d : p->value.data) put_f64(bytes, d);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed: " + path);
  }
}

std::vector<CheckpointEntry> read_manifest(const std::string& path) {
  return parse_checkpoint(path, false).manifest;
}

void load_checkpoint(const std::string& path, const std::vector<Param*>& params) {
  const ParsedCheckpoint parsed = parse_checkpoint(path, true);
  if (parsed.manifest.size() != params.size()) {
    throw Error(ErrorKind::ParseError,
                path + ": holds " + std::to_string(parsed.manifest.size()) +
                    " parameters, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const CheckpointEntry& e = parsed.manifest[i];
    if (e.name != params[i]->name) {
      throw Error(ErrorKind::ParseError, path + ": parameter " + std::to_string(i) +
                                             " is '" + e.name + "', model expects '" +
                                             params[i]->name + "'");
    }
    if (e.rows != params[i]->value.rows || e.cols != params[i]->value.cols) {
      throw Error(ErrorKind::ShapeMismatch,
                  path + ": '" + e.name + "' is " + std::to_string(e.rows) + "x" +
                      std::to_string(e.cols) + ", model expects " +
                      std::to_string(params[i]->value.rows) + "x" +
                      std::to_string(params[i]->value.cols));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value.data = parsed.values[i];
    for (double& g : params[i]->grad.data) g = 0.0;
  }
}

namespace {

const char* regex_mode_name(RegexMode m) {
  switch (m) {
    case RegexMode::None: return "none";
    case RegexMode::Ordinary: return "ordinary";
    case RegexMode::Bag: return "bag";
  }
  return "none";
}

RegexMode regex_mode_from(const std::string& s) {
  if (s == "none") return RegexMode::None;
  if (s == "ordinary") return RegexMode::Ordinary;
  if (s == "bag") return RegexMode::Bag;
  throw Error(ErrorKind::ParseError, "unknown regex mode '" + s + "'");
}

const char* fusion_layer_name(FusionLayer f) {
  return f == FusionLayer::Linear ? "linear" : "self_attention";
}

FusionLayer fusion_layer_from(const std::string& s) {
  if (s == "self_attention") return FusionLayer::SelfAttention;
  if (s == "linear") return FusionLayer::Linear;
  throw Error(ErrorKind::ParseError, "unknown fusion layer '" + s + "'");
}

const char* readout_name(Readout r) {
  return r == Readout::MeanPool ? "mean_pool" : "position0";
}

Readout readout_from(const std::string& s) {
  if (s == "position0") return Readout::Position0;
  if (s == "mean_pool") return Readout::MeanPool;
  throw Error(ErrorKind::ParseError, "unknown readout '" + s + "'");
}

}  // namespace

nlohmann::json fusion_config_to_json(const FusionConfig& cfg) {
  return {{"d_model", cfg.d_model},
          {"regex_mode", regex_mode_name(cfg.regex_mode)},
          {"fusion_layer", fusion_layer_name(cfg.fusion_layer)},
          {"heads", cfg.heads},
          {"cap", cfg.cap},
          {"mask_padding", cfg.mask_padding},
          {"head_hidden", cfg.head_hidden},
          {"readout", readout_name(cfg.readout)},
          {"block_extras", cfg.block_extras}};
}

FusionConfig fusion_config_from_json(const nlohmann::json& j) {
  FusionConfig cfg;
  if (j.contains("d_model")) cfg.d_model = j.at("d_model").get<int>();
  if (j.contains("regex_mode"))
    cfg.regex_mode = regex_mode_from(j.at("regex_mode").get<std::string>());
  if (j.contains("fusion_layer"))
    cfg.fusion_layer = fusion_layer_from(j.at("fusion_layer").get<std::string>());
  if (j.contains("heads")) cfg.heads = j.at("heads").get<int>();
  if (j.contains("cap")) cfg.cap = j.at("cap").get<int>();
  if (j.contains("mask_padding")) cfg.mask_padding = j.at("mask_padding").get<bool>();
  if (j.contains("head_hidden")) cfg.head_hidden = j.at("head_hidden").get<int>();
  if (j.contains("readout")) cfg.readout = readout_from(j.at("readout").get<std::string>());
  if (j.contains("block_extras")) cfg.block_extras = j.at("block_extras").get<bool>();
  return cfg;
}

nlohmann::json model_sidecar(const AssembledModel& assembled) {
  nlohmann::json j = {{"variant", assembled.variant}};
  if (!assembled.model) return j;

  j["fusion"] = fusion_config_to_json(assembled.model->config());

  TextEncoder& enc = assembled.model->encoder();
  if (const auto* mini = dynamic_cast<const MiniEncoder*>(&enc)) {
    const MiniEncoderConfig& mc = mini->config();
    j["encoder"] = {{"kind", "mini"},
                    {"d_model", mc.d_model},
                    {"max_seq_len", mc.max_seq_len},
                    {"layers", mc.layers},
                    {"heads", mc.heads},
                    {"block_extras", mc.block_extras},
                    {"vocab", mini->vocab().token_to_id}};
  } else {
    j["encoder"] = {{"kind", "precomputed"}, {"d_model", enc.d_model()}};
  }
  return j;
}

AssembledModel model_from_sidecar(const nlohmann::json& sidecar,
                                  std::shared_ptr<TextEncoder> precomputed) {
  const int variant = sidecar.at("variant").get<int>();
  if (variant == 1) {
    AssembledModel out;
    out.variant = 1;
    return out;
  }

  const FusionConfig cfg = fusion_config_from_json(sidecar.at("fusion"));
  const nlohmann::json& enc = sidecar.at("encoder");
  const std::string kind = enc.at("kind").get<std::string>();

  std::shared_ptr<TextEncoder> encoder;
  if (kind == "mini") {
    Vocabulary vocab;
    vocab.token_to_id = enc.at("vocab").get<std::map<std::string, int>>();
    MiniEncoderConfig mc;
    mc.d_model = enc.at("d_model").get<int>();
    mc.max_seq_len = enc.at("max_seq_len").get<int>();
    mc.layers = enc.at("layers").get<int>();
    mc.heads = enc.at("heads").get<int>();
    mc.block_extras = enc.at("block_extras").get<bool>();
    encoder = std::make_shared<MiniEncoder>(std::move(vocab), mc);
  } else if (kind == "precomputed") {
    if (!precomputed) {
      throw Error(ErrorKind::ParseError,
                  "sidecar describes a precomputed text channel; supply its vector store");
    }
    const int want = enc.at("d_model").get<int>();
    if (precomputed->d_model() != want) {
      throw Error(ErrorKind::DimensionMismatch,
                  "supplied vectors are " + std::to_string(precomputed->d_model()) +
                      "-wide, sidecar expects " + std::to_string(want));
    }
    encoder = std::move(precomputed);
  } else {
    throw Error(ErrorKind::ParseError, "unknown encoder kind '" + kind + "'");
  }
  return assemble_model(variant, std::move(encoder), cfg);
}

void save_model(const std::string& checkpoint_path, const std::string& sidecar_path,
                const AssembledModel& assembled) {
  std::vector<Param*> params;
  if (assembled.model) assembled.model->collect_params(params);
  save_checkpoint(checkpoint_path, params);

  std::ofstream out(sidecar_path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open for writing: " + sidecar_path);
  }
  out << model_sidecar(assembled).dump(2) << "\n";
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed: " + sidecar_path);
  }
}

AssembledModel load_model(const std::string& checkpoint_path,
                          const std::string& sidecar_path,
                          std::shared_ptr<TextEncoder> precomputed) {
  std::ifstream in(sidecar_path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open sidecar: " + sidecar_path);
  }
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, sidecar_path + ": " + e.what());
  }

  AssembledModel assembled = model_from_sidecar(sidecar, std::move(precomputed));
  std::vector<Param*> params;
  if (assembled.model) assembled.model->collect_params(params);
  load_checkpoint(checkpoint_path, params);
  return assembled;
}

}  // namespace topicfuse
