#include "cogwifi/ml/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cogwifi/error.hpp"

namespace cogwifi::ml {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "cogwifi-model";

json to_json(const Normalizer& n) { return {{"mean", n.mean}, {"scale", n.scale}}; }
json to_json(const TargetScaler& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Normalizer normalizer_from(const json& j) {
    Normalizer n;
    j.at("mean").get_to(n.mean);
    j.at("scale").get_to(n.scale);
    if (n.mean.size() != n.scale.size()) throw ParseError("model: normaliser size mismatch");
    return n;
}

TargetScaler scaler_from(const json& j) { return {j.at("mean").get<double>(), j.at("scale").get<double>()}; }

json to_json(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json f = json::array(), th = json::array(), l = json::array(), r = json::array(), lab = json::array();
        for (const auto& n : t.nodes) {
            f.push_back(n.feature);
            th.push_back(n.threshold);
            l.push_back(n.left);
            r.push_back(n.right);
            lab.push_back(n.label);
        }
        trees.push_back({{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"label", lab}});
    }
    return {{"hyperparameters",
             {{"n_trees", m.params.n_trees},
              {"max_depth", m.params.max_depth},
              {"min_leaf", m.params.min_leaf},
              {"feat_frac", m.params.feat_frac}}},
            {"n_features", m.n_features},
            {"seed", m.seed},
            {"trees", trees}};
}

ForestModel forest_from(const json& j) {
    ForestModel m;
    const auto& h = j.at("hyperparameters");
    m.params.n_trees = h.at("n_trees").get<int>();
    m.params.max_depth = h.at("max_depth").get<int>();
    m.params.min_leaf = h.at("min_leaf").get<int>();
    m.params.feat_frac = h.at("feat_frac").get<double>();
    m.n_features = j.at("n_features").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("trees")) {
        const auto f = t.at("feature").get<std::vector<int>>();
        const auto th = t.at("threshold").get<std::vector<double>>();
        const auto l = t.at("left").get<std::vector<int>>();
        const auto r = t.at("right").get<std::vector<int>>();
        const auto lab = t.at("label").get<std::vector<int>>();
        const std::size_t n = f.size();
        if (th.size() != n || l.size() != n || r.size() != n || lab.size() != n || n == 0)
            throw ParseError("model: malformed tree");
        DecisionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
            if (f[i] >= 0) {
                const auto ok = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
                if (f[i] >= m.n_features || !ok(l[i]) || !ok(r[i])) throw ParseError("model: malformed tree node");
            }
            tree.nodes.push_back({f[i], th[i], l[i], r[i], lab[i]});
        }
        m.trees.push_back(std::move(tree));
    }
    if (m.trees.size() != static_cast<std::size_t>(m.params.n_trees)) throw ParseError("model: tree count mismatch");
    return m;
}

json to_json(const MlpModel& m) {
    return {{"hyperparameters", {{"layers", m.layers}, {"activation", "softplus"}}},
            {"weights", m.weights},
            {"biases", m.biases},
            {"x_norm", to_json(m.x_norm)},
            {"y_scale", to_json(m.y_scale)}};
}

MlpModel mlp_from(const json& j) {
    MlpModel m;
    j.at("hyperparameters").at("layers").get_to(m.layers);
    j.at("weights").get_to(m.weights);
    j.at("biases").get_to(m.biases);
    m.x_norm = normalizer_from(j.at("x_norm"));
    m.y_scale = scaler_from(j.at("y_scale"));
    if (m.layers.size() < 2 || m.weights.size() != m.layers.size() - 1 || m.biases.size() != m.weights.size())
        throw ParseError("model: malformed network");
    for (std::size_t l = 0; l < m.weights.size(); ++l)
        if (m.weights[l].size() != static_cast<std::size_t>(m.layers[l]) * m.layers[l + 1]
            || m.biases[l].size() != static_cast<std::size_t>(m.layers[l + 1]))
            throw ParseError("model: layer " + std::to_string(l) + " has the wrong shape");
    if (m.x_norm.mean.size() != static_cast<std::size_t>(m.layers.front()))
        throw ParseError("model: normaliser does not match input layer");
    return m;
}

json to_json(const SvrModel& m) {
    return {{"hyperparameters", {{"C", m.C}, {"epsilon", m.epsilon}, {"gamma", m.gamma}, {"kernel", "rbf"}}},
            {"support", m.support},
            {"coef", m.coef},
            {"bias", m.bias},
            {"iterations", m.iterations},
            {"kkt_violation", m.kkt_violation},
            {"x_norm", to_json(m.x_norm)},
            {"y_scale", to_json(m.y_scale)}};
}

SvrModel svr_from(const json& j) {
    SvrModel m;
    const auto& h = j.at("hyperparameters");
    m.C = h.at("C").get<double>();
    m.epsilon = h.at("epsilon").get<double>();
    m.gamma = h.at("gamma").get<double>();
    j.at("support").get_to(m.support);
    j.at("coef").get_to(m.coef);
    m.bias = j.at("bias").get<double>();
    m.iterations = j.at("iterations").get<long>();
    m.kkt_violation = j.at("kkt_violation").get<double>();
    m.x_norm = normalizer_from(j.at("x_norm"));
    m.y_scale = scaler_from(j.at("y_scale"));
    if (m.support.size() != m.coef.size()) throw ParseError("model: support/coef size mismatch");
    return m;
}

} // namespace

std::string StoredModel::algo() const {
    switch (model.index()) {
    case 0: return "rf";
    case 1: return "mlp";
    default: return "svr";
    }
}

std::string serialize(const StoredModel& m) {
    json body = std::visit([](const auto& v) { return to_json(v); }, m.model);
    json doc = {{"format", kFormatTag},
                {"version", kModelFormatVersion},
                {"algo", m.algo()},
                {"schema", to_string(m.schema)},
                {"model", body}};
    return doc.dump(1);
}

StoredModel deserialize(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != kFormatTag) throw ParseError("model: not a cogwifi model file");
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw ParseError("model: unsupported format version " + std::to_string(version) + " (expected "
                             + std::to_string(kModelFormatVersion) + ")");
        StoredModel m;
        m.schema = schema_from_string(doc.at("schema").get<std::string>());
        const auto algo = doc.at("algo").get<std::string>();
        const auto& body = doc.at("model");
        if (algo == "rf")
            m.model = forest_from(body);
        else if (algo == "mlp")
            m.model = mlp_from(body);
        else if (algo == "svr")
            m.model = svr_from(body);
        else
            throw ParseError("model: unknown algorithm '" + algo + "'");
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: malformed document: ") + e.what());
    }
}

void save_model(const StoredModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file " + path.string());
    out << serialize(m);
    if (!out) throw IoError("failed writing model file " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

} // namespace cogwifi::ml
