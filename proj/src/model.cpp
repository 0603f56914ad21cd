#include "trd/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace trd {

using nlohmann::json;

double StageParams::lambda() const { return std::exp(log_lambda); }

void TrdModel::validate() const {
    rbf.validate();
    if (stage_count < 0) throw DataError("model: negative stage count");
    if (int(stages.size()) != stage_count) throw DataError("model: stages length != T");
    if (filter_size < 1 || filter_size % 2 == 0) throw DataError("model: filter size must be odd");
    const int n_basis = filter_size * filter_size - 1;
    if (filters_per_stage < 1 || filters_per_stage > n_basis)
        throw DataError("model: filters per stage must be in [1, m^2-1]");
    for (const auto& sp : stages) {
        if (int(sp.coeffs.size()) != filters_per_stage || int(sp.mixtures.size()) != filters_per_stage)
            throw DataError("model: stage filter count mismatch");
        for (const auto& c : sp.coeffs) {
            if (int(c.size()) != n_basis) throw DataError("model: coefficient length mismatch");
            for (double v : c)
                if (!std::isfinite(v)) throw DataError("model: non-finite coefficient");
        }
        for (const auto& mix : sp.mixtures)
            if (int(mix.weights.size()) != rbf.count)
                throw DataError("model: mixture weight length mismatch");
        if (task == Task::denoise && !std::isfinite(sp.log_lambda))
            throw DataError("model: non-finite log_lambda");
    }
    if (task == Task::denoise && !(sigma >= 0)) throw DataError("model: sigma must be >= 0");
    if (task == Task::deblock && (quality < 1 || quality > 100))
        throw DataError("model: quality must be in [1,100]");
}

FilterBasis build_basis(int m) {
    if (m != 3 && m != 5 && m != 7 && m != 9)
        throw DataError("build_basis: filter size must be one of 3,5,7,9");
    std::vector<std::vector<double>> d(m, std::vector<double>(m));
    for (int k = 0; k < m; ++k) {
        double a = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
        for (int n = 0; n < m; ++n) d[k][n] = a * std::cos(M_PI * k * (2 * n + 1) / (2.0 * m));
    }
    FilterBasis basis;
    basis.m = m;
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
            if (p == 0 && q == 0) continue;
            std::vector<double> taps(size_t(m) * m);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) taps[size_t(r) * m + c] = d[p][r] * d[q][c];
            basis.atoms.emplace_back(m, m, std::move(taps));
        }
    }
    return basis;
}

Kernel assemble_filter(const FilterBasis& basis, const std::vector<double>& coeff) {
    if (coeff.size() != basis.atoms.size())
        throw DataError("assemble_filter: coefficient length must equal basis size");
    Kernel out(basis.m, basis.m, std::vector<double>(size_t(basis.m) * basis.m, 0.0));
    for (size_t b = 0; b < coeff.size(); ++b) {
        const Kernel& atom = basis.atoms[b];
        for (size_t t = 0; t < out.taps.size(); ++t) out.taps[t] += coeff[b] * atom.taps[t];
    }
    return out;
}

TrdModel init_model(const ModelConfig& config) {
    const int n_basis = config.filter_size * config.filter_size - 1;
    if (config.filters > n_basis)
        throw DataError("init_model: filter count exceeds m^2-1");
    TrdModel model;
    model.task = config.task;
    model.sigma = config.sigma;
    model.quality = config.quality;
    model.stage_count = config.stages;
    model.filter_size = config.filter_size;
    model.filters_per_stage = config.filters;
    model.rbf = config.rbf;
    model.trained_mode = TrainedMode::greedy;

    RbfMixture plain = fit_plain_influence(config.rbf);
    StageParams sp;
    sp.log_lambda = std::log(0.1);
    for (int i = 0; i < config.filters; ++i) {
        std::vector<double> c(n_basis, 0.0);
        c[i] = 1.0;
        sp.coeffs.push_back(std::move(c));
        sp.mixtures.push_back(plain);
    }
    model.stages.assign(config.stages, sp);
    model.validate();
    return model;
}

namespace {

const char* task_name(Task t) { return t == Task::denoise ? "denoise" : "deblock"; }
const char* kind_name(RbfKind k) { return k == RbfKind::gaussian ? "gaussian" : "triangular"; }
const char* mode_name(TrainedMode m) { return m == TrainedMode::greedy ? "greedy" : "joint"; }

} // namespace

std::string model_to_json(const TrdModel& model) {
    json j;
    j["version"] = 1;
    j["task"] = task_name(model.task);
    if (model.task == Task::denoise)
        j["sigma"] = model.sigma;
    else
        j["quality"] = model.quality;
    j["T"] = model.stage_count;
    j["m"] = model.filter_size;
    j["n_k"] = model.filters_per_stage;
    j["rbf"] = {{"kind", kind_name(model.rbf.kind)},
                {"M", model.rbf.count},
                {"R", model.rbf.radius},
                {"gamma", model.rbf.gamma}};
    j["trained"] = mode_name(model.trained_mode);
    json stages = json::array();
    for (const auto& sp : model.stages) {
        json s;
        s["coeffs"] = sp.coeffs;
        json w = json::array();
        for (const auto& mix : sp.mixtures) w.push_back(mix.weights);
        s["weights"] = w;
        s["log_lambda"] = sp.log_lambda;
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    return j.dump(1);
}

TrdModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model parse error: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) throw DataError("model: unsupported version");
        TrdModel model;
        std::string task = j.at("task").get<std::string>();
        if (task == "denoise") {
            model.task = Task::denoise;
            model.sigma = j.at("sigma").get<double>();
        } else if (task == "deblock") {
            model.task = Task::deblock;
            model.quality = j.at("quality").get<int>();
        } else {
            throw DataError("model: unknown task '" + task + "'");
        }
        model.stage_count = j.at("T").get<int>();
        model.filter_size = j.at("m").get<int>();
        model.filters_per_stage = j.at("n_k").get<int>();
        const json& rbf = j.at("rbf");
        std::string kind = rbf.at("kind").get<std::string>();
        if (kind != "gaussian" && kind != "triangular")
            throw DataError("model: unknown rbf kind '" + kind + "'");
        model.rbf = RbfConfig::make(kind == "gaussian" ? RbfKind::gaussian : RbfKind::triangular,
                                    rbf.at("M").get<int>(), rbf.at("R").get<double>(),
                                    rbf.at("gamma").get<double>());
        std::string mode = j.at("trained").get<std::string>();
        if (mode != "greedy" && mode != "joint") throw DataError("model: unknown trained mode");
        model.trained_mode = mode == "greedy" ? TrainedMode::greedy : TrainedMode::joint;
        for (const json& s : j.at("stages")) {
            StageParams sp;
            sp.coeffs = s.at("coeffs").get<std::vector<std::vector<double>>>();
            for (const auto& w : s.at("weights").get<std::vector<std::vector<double>>>())
                sp.mixtures.emplace_back(model.rbf, w);
            sp.log_lambda = s.at("log_lambda").get<double>();
            model.stages.push_back(std::move(sp));
        }
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model schema error: ") + e.what());
    }
}

void save_model(const TrdModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_model: cannot open '" + path + "'");
    out << model_to_json(model) << '\n';
    if (!out) throw DataError("save_model: write failed for '" + path + "'");
}

TrdModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_model: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

} // namespace trd
