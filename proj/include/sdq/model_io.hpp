#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sdq/model.hpp"

namespace sdq {

class ModelParseError : public std::runtime_error {
public:
    explicit ModelParseError(const std::string& what) : std::runtime_error(what) {}
};

using json = nlohmann::ordered_json;

inline json to_json(const ServiceDistribution& d) {
    json j;
    j["kind"] = to_string(d.kind());
    switch (d.kind()) {
        case ServiceKind::Exponential: j["rate"] = d.param1(); break;
        case ServiceKind::Deterministic: j["mean"] = d.param1(); break;
        case ServiceKind::Erlang:
            j["shape"] = static_cast<long long>(d.param1());
            j["rate"] = d.param2();
            break;
        case ServiceKind::Pareto:
            j["shape"] = d.param1();
            j["scale"] = d.param2();
            break;
        case ServiceKind::Lognormal:
            j["location"] = d.param1();
            j["scale"] = d.param2();
            break;
        case ServiceKind::Weibull:
            j["shape"] = d.param1();
            j["scale"] = d.param2();
            break;
    }
    return j;
}

inline ServiceDistribution service_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ModelParseError("service entry must be an object with a \"kind\" tag");
    const std::string kind = j.at("kind").get<std::string>();
    auto num = [&](const char* name) -> double {
        if (!j.contains(name) || !j.at(name).is_number())
            throw ModelParseError("service kind \"" + kind + "\" needs numeric field \"" + name + "\"");
        return j.at(name).get<double>();
    };
    if (kind == "exponential") return ServiceDistribution::exponential(num("rate"));
    if (kind == "deterministic") return ServiceDistribution::deterministic(num("mean"));
    if (kind == "erlang")
        return ServiceDistribution::erlang(static_cast<long long>(num("shape")), num("rate"));
    if (kind == "pareto") return ServiceDistribution::pareto(num("shape"), num("scale"));
    if (kind == "lognormal") return ServiceDistribution::lognormal(num("location"), num("scale"));
    if (kind == "weibull") return ServiceDistribution::weibull(num("shape"), num("scale"));
    throw ModelParseError("unknown service kind \"" + kind + "\"");
}

inline json to_json(const ModelSpec& spec) {
    json j;
    j["k"] = spec.k;
    json rows = json::array();
    for (int i = 0; i < spec.k; ++i) {
        json row = json::array();
        for (int c = 0; c < spec.k; ++c) row.push_back(spec.lambda(i, c));
        rows.push_back(row);
    }
    j["lambda"] = rows;
    j["lambda0"] = spec.lambda0;
    json svc = json::array();
    for (const auto& d : spec.service) svc.push_back(to_json(d));
    j["service"] = svc;
    return j;
}

inline ModelSpec model_from_json(const json& j) {
    if (!j.is_object()) throw ModelParseError("model file must contain a JSON object");
    for (const char* field : {"k", "lambda", "lambda0", "service"})
        if (!j.contains(field))
            throw ModelParseError(std::string("model file is missing field \"") + field + "\"");
    ModelSpec spec;
    if (!j.at("k").is_number_integer()) throw ModelParseError("\"k\" must be an integer");
    spec.k = j.at("k").get<int>();
    if (spec.k < 1) throw ModelParseError("\"k\" must be >= 1");
    const auto& lam = j.at("lambda");
    if (!lam.is_array() || lam.size() != static_cast<std::size_t>(spec.k))
        throw ModelParseError("\"lambda\" must be an array of K rows");
    spec.lambda = Mat(spec.k, spec.k);
    for (int i = 0; i < spec.k; ++i) {
        const auto& row = lam.at(i);
        if (!row.is_array() || row.size() != static_cast<std::size_t>(spec.k))
            throw ModelParseError("\"lambda\" row " + std::to_string(i + 1) + " must have K entries");
        for (int c = 0; c < spec.k; ++c) {
            if (!row.at(c).is_number())
                throw ModelParseError("\"lambda\" entries must be numeric");
            spec.lambda(i, c) = row.at(c).get<double>();
        }
    }
    const auto& l0 = j.at("lambda0");
    if (!l0.is_array() || l0.size() != static_cast<std::size_t>(spec.k))
        throw ModelParseError("\"lambda0\" must be an array of K rates");
    for (const auto& v : l0) {
        if (!v.is_number()) throw ModelParseError("\"lambda0\" entries must be numeric");
        spec.lambda0.push_back(v.get<double>());
    }
    const auto& svc = j.at("service");
    if (!svc.is_array() || svc.size() != static_cast<std::size_t>(spec.k))
        throw ModelParseError("\"service\" must be an array of K distributions");
    for (const auto& v : svc) spec.service.push_back(service_from_json(v));
    return spec;
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelParseError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ModelParseError("model file is not valid JSON: " + std::string(e.what()));
    }
    return model_from_json(j);
}

// Stable content digest for run manifests (FNV-1a over the raw bytes).
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelParseError("cannot open file for digest: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char ch;
    while (in.get(ch)) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << h;
    return os.str();
}

} // namespace sdq
