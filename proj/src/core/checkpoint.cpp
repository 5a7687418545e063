#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace addunet {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'D', 'U', 'N', 'E', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return nlohmann::json{{"variant", variant_name(c.variant)},
                          {"depth", c.depth},
                          {"channels", c.channels},
                          {"kernels", c.kernels},
                          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.variant = variant_from_name(j.at("variant").get<std::string>());
    c.depth = j.at("depth").get<int>();
    c.channels = j.at("channels").get<int>();
    c.kernels = j.at("kernels").get<std::vector<int>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json manifest = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
        manifest.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(t.numel()) * 8;
    }
    nlohmann::json header{{"format_version", 1},
                          {"model", config_to_json(ckpt.config)},
                          {"extra", ckpt.extra},
                          {"tensors", manifest}};
    const std::string hdr = header.dump(); // insertion-stable: nlohmann sorts keys

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out.write(kMagic, 8);
    write_u64(out, hdr.size());
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        (void)name;
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.data().size() * 8));
    }
    if (!out) throw DataError("write failed for checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("'" + path + "' is not an ADDUNET1 checkpoint");
    const std::uint64_t hdr_len = read_u64(in);
    if (!in) throw DataError("'" + path + "': truncated checkpoint header");
    std::string hdr(hdr_len, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
    if (static_cast<std::uint64_t>(in.gcount()) != hdr_len)
        throw DataError("'" + path + "': truncated checkpoint header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hdr);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path + "': bad checkpoint header: " + e.what());
    }
    Checkpoint ckpt;
    try {
        ckpt.config = config_from_json(header.at("model"));
        ckpt.extra = header.value("extra", nlohmann::json::object());
        for (const auto& entry : header.at("tensors")) {
            const std::string name = entry.at("name").get<std::string>();
            const std::vector<std::int64_t> shape = entry.at("shape").get<std::vector<std::int64_t>>();
            Tensor t = Tensor::zeros(shape);
            in.read(reinterpret_cast<char*>(t.data().data()),
                    static_cast<std::streamsize>(t.data().size() * 8));
            if (static_cast<std::size_t>(in.gcount()) != t.data().size() * 8)
                throw DataError("'" + path + "': truncated tensor payload for '" + name + "'");
            ckpt.tensors.emplace_back(name, std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path + "': bad checkpoint manifest: " + e.what());
    }
    return ckpt;
}

Checkpoint snapshot(const Model& model, const Adam* adam, nlohmann::json extra) {
    Checkpoint ckpt;
    ckpt.config = model.config();
    for (const auto& [name, t] : model.parameters()) ckpt.tensors.emplace_back(name, t.clone());
    if (adam) {
        Adam& a = *const_cast<Adam*>(adam);
        const auto& params = model.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            ckpt.tensors.emplace_back("adam.m." + params[i].first,
                                      Tensor::from_data(params[i].second.shape(), a.moment1()[i]));
            ckpt.tensors.emplace_back("adam.v." + params[i].first,
                                      Tensor::from_data(params[i].second.shape(), a.moment2()[i]));
        }
        extra["adam"] = {{"lr", adam->config().lr},
                         {"beta1", adam->config().beta1},
                         {"beta2", adam->config().beta2},
                         {"eps", adam->config().eps},
                         {"step_count", adam->step_count()}};
    }
    ckpt.extra = std::move(extra);
    return ckpt;
}

Model restore_model(const Checkpoint& ckpt) {
    Model model(ckpt.config);
    std::vector<std::pair<std::string, Tensor>> params;
    for (const auto& [name, t] : ckpt.tensors)
        if (name.rfind("adam.", 0) != 0) params.emplace_back(name, t);
    model.load_parameters(params);
    return model;
}

bool restore_adam(const Checkpoint& ckpt, const Model& model, Adam* adam) {
    if (!ckpt.extra.contains("adam")) return false;
    const nlohmann::json& aj = ckpt.extra.at("adam");
    AdamConfig cfg;
    cfg.lr = aj.at("lr").get<double>();
    cfg.beta1 = aj.at("beta1").get<double>();
    cfg.beta2 = aj.at("beta2").get<double>();
    cfg.eps = aj.at("eps").get<double>();
    *adam = Adam(model.parameters(), cfg);
    adam->set_step_count(aj.at("step_count").get<std::int64_t>());
    const auto& params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        bool found_m = false, found_v = false;
        for (const auto& [name, t] : ckpt.tensors) {
            if (name == "adam.m." + params[i].first) {
                adam->moment1()[i] = t.data();
                found_m = true;
            } else if (name == "adam.v." + params[i].first) {
                adam->moment2()[i] = t.data();
                found_v = true;
            }
        }
        if (!found_m || !found_v)
            throw DataError("checkpoint is missing adam state for '" + params[i].first + "'");
    }
    return true;
}

} // namespace addunet
