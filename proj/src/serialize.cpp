#include "relu_forge/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relu_forge {

using nlohmann::json;

std::string serialize(const Network& net) {
    json layers = json::array();
    for (const auto& l : net.layers()) {
        layers.push_back({{"weights", l.dense_weights()},
                          {"bias", l.bias()},
                          {"activation", l.activation() == Activation::relu ? "relu" : "identity"}});
    }
    json doc = {{"version", kFormatVersion}, {"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
    return doc.dump();
}

namespace {

double finite_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError("expected a number", path);
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError("non-finite value", path);
    return x;
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError("expected an object", path);
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", path);
    return *it;
}

} // namespace

Network deserialize(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), "", e.byte);
    }
    const json& version = field(doc, "version", "");
    if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
        throw ParseError("unsupported format version", "/version");
    const json& in = field(doc, "input_dim", "");
    if (!in.is_number_unsigned() || in.get<std::size_t>() == 0)
        throw ParseError("input_dim must be a positive integer", "/input_dim");
    const json& layers = field(doc, "layers", "");
    if (!layers.is_array() || layers.empty()) throw ParseError("layers must be a nonempty array", "/layers");

    std::vector<AffineLayer<double>> out;
    std::size_t expect = in.get<std::size_t>();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        std::string base = "/layers/" + std::to_string(i);
        const json& w = field(layers[i], "weights", base);
        const json& b = field(layers[i], "bias", base);
        const json& a = field(layers[i], "activation", base);
        if (!w.is_array()) throw ParseError("weights must be an array", base + "/weights");
        if (!b.is_array() || b.size() != w.size())
            throw ParseError("bias length must equal the number of weight rows", base + "/bias");
        Activation act;
        if (a == "relu")
            act = Activation::relu;
        else if (a == "identity")
            act = Activation::identity;
        else
            throw ParseError("activation must be \"relu\" or \"identity\"", base + "/activation");

        std::vector<Entry<double>> entries;
        std::vector<double> bias;
        for (std::size_t r = 0; r < w.size(); ++r) {
            std::string rp = base + "/weights/" + std::to_string(r);
            if (!w[r].is_array() || w[r].size() != expect)
                throw ParseError("row must have " + std::to_string(expect) + " entries", rp);
            for (std::size_t c = 0; c < expect; ++c) {
                double v = finite_number(w[r][c], rp + "/" + std::to_string(c));
                if (v != 0.0) entries.push_back({r, c, v});
            }
            bias.push_back(finite_number(b[r], base + "/bias/" + std::to_string(r)));
        }
        out.push_back(AffineLayer<double>::from_entries(expect, w.size(), std::move(entries), std::move(bias), act));
        expect = w.size();
    }
    try {
        return Network(in.get<std::size_t>(), std::move(out));
    } catch (const NetError& e) {
        throw ParseError(e.what(), e.layer() >= 0 ? "/layers/" + std::to_string(e.layer()) : "/layers");
    }
}

void save_network(const Network& net, const std::filesystem::path& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os << serialize(net) << '\n';
    if (!os) throw std::runtime_error("failed writing " + file.string());
}

Network load_network(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return deserialize(ss.str());
}

} // namespace relu_forge
