#include "pranet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pranet/errors.hpp"

namespace pranet {

void RunConfig::validate() const {
    model.validate();
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batchSize must be >= 1");
    if (!(lr > 0.0f)) throw InvalidArgument("lr must be positive");
    if (data.kind == DataSource::Kind::synthetic) {
        if (data.n < 0) throw InvalidArgument("dataSource.n must be non-negative");
    } else {
        if (data.image_dir.empty() || data.mask_dir.empty())
            throw InvalidArgument("dataSource.directories needs imageDir and maskDir");
    }
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

}  // namespace

std::string RunConfig::to_json() const {
    char lr_buf[32];
    std::snprintf(lr_buf, sizeof(lr_buf), "%.9g", static_cast<double>(lr));
    std::ostringstream os;
    os << "{\"model\":{\"inputSize\":" << model.input_size << ",\"levelChannels\":[";
    for (std::size_t i = 0; i < model.level_channels.size(); ++i)
        os << (i ? "," : "") << model.level_channels[i];
    os << "],\"reducedChannels\":" << model.reduced_channels
       << ",\"refineDepth\":" << model.refine_depth
       << ",\"enablePPD\":" << (model.enable_ppd ? "true" : "false")
       << ",\"enableRA\":" << (model.enable_ra ? "true" : "false") << "}"
       << ",\"epochs\":" << epochs << ",\"batchSize\":" << batch_size << ",\"lr\":" << lr_buf
       << ",\"seed\":" << seed << ",\"dataSource\":";
    if (data.kind == DataSource::Kind::synthetic) {
        os << "{\"type\":\"synthetic\",\"n\":" << data.n << ",\"size\":" << data.size << "}";
    } else {
        os << "{\"type\":\"directories\",\"imageDir\":\"" << json_escape(data.image_dir)
           << "\",\"maskDir\":\"" << json_escape(data.mask_dir) << "\"}";
    }
    os << ",\"outputDir\":\"" << json_escape(output_dir) << "\"}";
    return os.str();
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        if (j.contains("model")) {
            const auto& m = j["model"];
            if (m.contains("inputSize")) cfg.model.input_size = m["inputSize"].get<int>();
            if (m.contains("levelChannels")) {
                const auto& lc = m["levelChannels"];
                if (!lc.is_array() || lc.size() != 5)
                    throw InvalidArgument("levelChannels must be an array of 5 integers");
                for (std::size_t i = 0; i < 5; ++i)
                    cfg.model.level_channels[i] = lc[i].get<int>();
            }
            if (m.contains("reducedChannels"))
                cfg.model.reduced_channels = m["reducedChannels"].get<int>();
            if (m.contains("refineDepth")) cfg.model.refine_depth = m["refineDepth"].get<int>();
            if (m.contains("enablePPD")) cfg.model.enable_ppd = m["enablePPD"].get<bool>();
            if (m.contains("enableRA")) cfg.model.enable_ra = m["enableRA"].get<bool>();
        }
        if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
        if (j.contains("batchSize")) cfg.batch_size = j["batchSize"].get<int>();
        if (j.contains("lr")) cfg.lr = j["lr"].get<float>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("dataSource")) {
            const auto& ds = j["dataSource"];
            const std::string type = ds.value("type", "synthetic");
            if (type == "synthetic") {
                cfg.data.kind = DataSource::Kind::synthetic;
                if (ds.contains("n")) cfg.data.n = ds["n"].get<int>();
                if (ds.contains("size")) cfg.data.size = ds["size"].get<int>();
            } else if (type == "directories") {
                cfg.data.kind = DataSource::Kind::directories;
                cfg.data.image_dir = ds.value("imageDir", "");
                cfg.data.mask_dir = ds.value("maskDir", "");
            } else {
                throw InvalidArgument("unknown dataSource.type: " + type);
            }
        }
        if (j.contains("outputDir")) cfg.output_dir = j["outputDir"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config field has the wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

}  // namespace pranet
