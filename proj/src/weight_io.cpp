#include "fedfft/weight_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fedfft {

using nlohmann::json;

ModelWeights parse_weight_dump(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Format, std::string("weight dump is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer()) {
        throw Error(ErrorCode::Format, "weight dump lacks an integer 'version'");
    }
    if (doc["version"].get<int>() != kWeightDumpVersion) {
        throw Error(ErrorCode::Format, "unsupported weight dump version " + doc["version"].dump());
    }
    if (!doc.contains("layers") || !doc["layers"].is_array()) {
        throw Error(ErrorCode::Format, "weight dump lacks a 'layers' array");
    }

    std::vector<Layer> layers;
    for (const auto& entry : doc["layers"]) {
        if (!entry.is_object() || !entry.contains("shape") || !entry.contains("data")) {
            throw Error(ErrorCode::Format, "layer entries need 'shape' and 'data'");
        }
        try {
            auto dims = entry["shape"].get<std::vector<std::size_t>>();
            auto data = entry["data"].get<std::vector<double>>();
            layers.push_back(Layer{TensorShape(std::move(dims)), std::move(data)});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Format, std::string("malformed layer: ") + e.what());
        }
    }
    try {
        return ModelWeights(std::move(layers));
    } catch (const Error& e) {
        throw Error(ErrorCode::Format, e.what());
    }
}

std::string format_weight_dump(const ModelWeights& w) {
    json doc;
    doc["version"] = kWeightDumpVersion;
    doc["layers"] = json::array();
    for (const auto& layer : w.layers()) {
        doc["layers"].push_back({{"shape", layer.shape.dims()}, {"data", layer.data}});
    }
    return doc.dump() + "\n";
}

ModelWeights read_weight_dump(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Format, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_weight_dump(buf.str());
}

void write_weight_dump(const std::filesystem::path& path, const ModelWeights& w) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Format, "cannot write " + path.string());
    out << format_weight_dump(w);
}

}  // namespace fedfft
