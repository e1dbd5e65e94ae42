#include "opsel/config_io.hpp"

#include <fstream>
#include <sstream>

namespace opsel {

using nlohmann::json;

namespace {

template <typename T>
T get_required(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

OperatorId id_from_json(const json& j, const std::string& where)
{
    if (j.is_number_integer()) return OperatorId{j.get<int>()};
    if (j.is_string())
        if (auto id = parse_operator_id(j.get<std::string>())) return *id;
    throw ConfigError("bad operator id in " + where);
}

}  // namespace

void require_valid(const ScenarioConfig& config)
{
    const auto violations = validate(config);
    if (violations.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& v : violations) msg += " " + v.field + " (" + v.rule + ");";
    throw ConfigError(msg);
}

json qos_to_json(const QosProfile& profile)
{
    json j = json::object();
    for (const auto& [kind, value] : profile) j[to_string(kind)] = value;
    return j;
}

QosProfile qos_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("QoS profile must be an object");
    QosProfile out;
    for (const auto& [key, value] : j.items()) {
        auto kind = parse_qos_kind(key);
        if (!kind) throw ConfigError("unknown QoS parameter '" + key + "'");
        if (!value.is_number()) throw ConfigError("QoS parameter '" + key + "' must be a number");
        out[*kind] = value.get<double>();
    }
    return out;
}

json to_json(const ScenarioConfig& config)
{
    json ops = json::array();
    for (const auto& op : config.operators) {
        ops.push_back({{"id", op.id.value},
                       {"rat_name", op.rat_name},
                       {"capacity", op.capacity},
                       {"delivered", qos_to_json(op.delivered)},
                       {"sp", op.sp},
                       {"cs", op.cs},
                       {"arrival_rate", op.arrival_rate}});
    }

    json subweights = json::object();
    for (const auto& [kind, w] : config.score_weights.qos_subweights) subweights[to_string(kind)] = w;

    json strategy = json::object();
    for (const auto& [id, w] : config.strategy)
        strategy[to_string(id)] = {{"w_u", w.w_u}, {"w_op", w.w_op}};

    return {
        {"operators", ops},
        {"service",
         {{"name", config.service.name},
          {"requirements", qos_to_json(config.service.requirements)},
          {"session_rate_per_rat", config.service.session_rate_per_rat},
          {"mean_duration", config.service.mean_duration}}},
        {"score_weights",
         {{"w_q", config.score_weights.w_q},
          {"w_p", config.score_weights.w_p},
          {"qos_subweights", subweights}}},
        {"aspiration_mode", to_string(config.aspiration_mode)},
        {"strategy", strategy},
        {"sim",
         {{"horizon", config.sim.horizon},
          {"warmup", config.sim.warmup},
          {"replications", config.sim.replications},
          {"seed", config.sim.seed},
          {"transfer_on_qos_violation", config.sim.transfer_on_qos_violation}}},
    };
}

ScenarioConfig scenario_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    ScenarioConfig cfg;

    const auto ops = get_required<json>(j, "operators", "scenario");
    if (!ops.is_array()) throw ConfigError("'operators' must be an array");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const auto& o = ops[i];
        const std::string where = "operators[" + std::to_string(i) + "]";
        OperatorConfig op;
        op.id = id_from_json(get_required<json>(o, "id", where), where);
        op.rat_name = get_required<std::string>(o, "rat_name", where);
        op.capacity = get_required<double>(o, "capacity", where);
        op.delivered = qos_from_json(get_required<json>(o, "delivered", where));
        op.sp = get_required<double>(o, "sp", where);
        op.cs = get_required<double>(o, "cs", where);
        op.arrival_rate = get_required<double>(o, "arrival_rate", where);
        cfg.operators.push_back(std::move(op));
    }

    const auto svc = get_required<json>(j, "service", "scenario");
    cfg.service.name = get_required<std::string>(svc, "name", "service");
    cfg.service.requirements = qos_from_json(get_required<json>(svc, "requirements", "service"));
    cfg.service.session_rate_per_rat =
        get_required<std::map<std::string, double>>(svc, "session_rate_per_rat", "service");
    cfg.service.mean_duration = get_required<double>(svc, "mean_duration", "service");

    const auto sw = get_required<json>(j, "score_weights", "scenario");
    cfg.score_weights.w_q = get_required<double>(sw, "w_q", "score_weights");
    cfg.score_weights.w_p = get_required<double>(sw, "w_p", "score_weights");
    const auto sub = get_required<json>(sw, "qos_subweights", "score_weights");
    if (!sub.is_object()) throw ConfigError("'qos_subweights' must be an object");
    for (const auto& [key, value] : sub.items()) {
        auto kind = parse_qos_kind(key);
        if (!kind || !value.is_number())
            throw ConfigError("bad qos_subweights entry '" + key + "'");
        cfg.score_weights.qos_subweights[*kind] = value.get<double>();
    }

    const auto mode_text = get_required<std::string>(j, "aspiration_mode", "scenario");
    auto mode = parse_aspiration_mode(mode_text);
    if (!mode) throw ConfigError("unknown aspiration_mode '" + mode_text + "'");
    cfg.aspiration_mode = *mode;

    const auto strategy = get_required<json>(j, "strategy", "scenario");
    if (!strategy.is_object()) throw ConfigError("'strategy' must be an object");
    for (const auto& [key, value] : strategy.items()) {
        auto id = parse_operator_id(key);
        if (!id) throw ConfigError("bad operator id '" + key + "' in strategy");
        const std::string where = "strategy." + key;
        cfg.strategy[*id] = {get_required<double>(value, "w_u", where),
                             get_required<double>(value, "w_op", where)};
    }

    const auto sim = get_required<json>(j, "sim", "scenario");
    cfg.sim.horizon = get_required<double>(sim, "horizon", "sim");
    cfg.sim.warmup = get_required<double>(sim, "warmup", "sim");
    cfg.sim.replications = get_required<int>(sim, "replications", "sim");
    cfg.sim.seed = get_required<std::uint64_t>(sim, "seed", "sim");
    cfg.sim.transfer_on_qos_violation = sim.value("transfer_on_qos_violation", false);

    return cfg;
}

std::string serialize_scenario(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

ScenarioConfig parse_scenario(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file " + path.string());
    out << serialize_scenario(config);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace opsel
