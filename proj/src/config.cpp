#include "ddmpc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ddmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) throw ConfigError(what);
    throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + what);
}

void allow_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> keys) {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
}

YAML::Node required(const YAML::Node& map, const char* key, const std::string& where) {
    const YAML::Node node = map[key];
    if (!node) fail(map, where + ": missing key '" + key + "'");
    return node;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, what + ": cannot parse '" + node.Scalar() + "'");
    }
}

double real(const YAML::Node& node, const std::string& what) {
    if (node.IsScalar()) {
        const std::string s = node.Scalar();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    return scalar<double>(node, what);
}

Index count(const YAML::Node& node, const std::string& what) {
    const long long v = scalar<long long>(node, what);
    if (v < 0) fail(node, what + " must be non-negative");
    return static_cast<Index>(v);
}

Vector vector(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    Vector v(static_cast<Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Index>(i)) = real(node[i], what);
    return v;
}

// A list of rows, or a scalar s meaning s*I of dimension `dim`.
Matrix matrix(const YAML::Node& node, const std::string& what, Index dim = -1) {
    if (node.IsScalar()) {
        if (dim < 0) fail(node, what + " must be a list of rows");
        return real(node, what) * Matrix::Identity(dim, dim);
    }
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a non-empty list of rows");
    const Index rows = static_cast<Index>(node.size());
    Index cols = -1;
    Matrix M;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const Vector row = vector(node[i], what);
        if (cols < 0) {
            cols = row.size();
            M.resize(rows, cols);
        } else if (row.size() != cols) {
            fail(node[i], what + ": rows differ in length");
        }
        M.row(static_cast<Index>(i)) = row.transpose();
    }
    return M;
}

Box box(const YAML::Node& node, const std::string& what) {
    allow_keys(node, what, {"lower", "upper"});
    Box b{vector(required(node, "lower", what), what + ".lower"), vector(required(node, "upper", what), what + ".upper")};
    if (b.lower.size() != b.upper.size()) fail(node, what + ": lower and upper differ in dimension");
    return b;
}

FourTankParams four_tank_params(const YAML::Node& node) {
    allow_keys(node, "plant.params", {"A1", "A2", "A3", "A4", "a1", "a2", "a3", "a4", "gamma1", "gamma2", "g"});
    FourTankParams p;
    auto read = [&](const char* key, double& field) {
        if (node[key]) field = real(node[key], std::string("plant.params.") + key);
    };
    read("A1", p.A1);
    read("A2", p.A2);
    read("A3", p.A3);
    read("A4", p.A4);
    read("a1", p.a1);
    read("a2", p.a2);
    read("a3", p.a3);
    read("a4", p.a4);
    read("gamma1", p.gamma1);
    read("gamma2", p.gamma2);
    read("g", p.g);
    return p;
}

PlantSpec parse_plant(const YAML::Node& node) {
    allow_keys(node, "plant",
               {"type", "params", "perturbation", "sample_time", "substeps", "A", "B", "C", "D", "x0", "noise"});
    PlantSpec spec;
    const std::string type = scalar<std::string>(required(node, "type", "plant"), "plant.type");
    if (type == "four_tank") {
        spec.kind = PlantKind::FourTank;
        for (const char* key : {"A", "B", "C", "D"}) {
            if (node[key]) fail(node[key], std::string("plant.") + key + " only applies to type lti");
        }
        if (node["params"]) spec.four_tank = four_tank_params(node["params"]);
        if (node["perturbation"]) {
            const YAML::Node pert = node["perturbation"];
            allow_keys(pert, "plant.perturbation", {"spread", "seed"});
            spec.perturbation_spread = real(required(pert, "spread", "plant.perturbation"), "plant.perturbation.spread");
            if (pert["seed"]) spec.perturbation_seed = scalar<std::uint64_t>(pert["seed"], "plant.perturbation.seed");
        }
        if (node["sample_time"]) spec.sample_time = real(node["sample_time"], "plant.sample_time");
        if (node["substeps"]) spec.substeps = scalar<int>(node["substeps"], "plant.substeps");
        spec.x0 = node["x0"] ? vector(node["x0"], "plant.x0") : Vector::Zero(4);
    } else if (type == "lti") {
        spec.kind = PlantKind::Lti;
        for (const char* key : {"params", "perturbation", "sample_time", "substeps"}) {
            if (node[key]) fail(node[key], std::string("plant.") + key + " only applies to type four_tank");
        }
        spec.lti.A = matrix(required(node, "A", "plant"), "plant.A");
        spec.lti.B = matrix(required(node, "B", "plant"), "plant.B");
        spec.lti.C = matrix(required(node, "C", "plant"), "plant.C");
        spec.lti.D = node["D"] ? matrix(node["D"], "plant.D") : Matrix::Zero(spec.lti.C.rows(), spec.lti.B.cols());
        spec.x0 = node["x0"] ? vector(node["x0"], "plant.x0") : Vector::Zero(spec.lti.A.rows());
    } else {
        fail(node["type"], "plant.type must be four_tank or lti, got '" + type + "'");
    }
    if (node["noise"]) {
        const YAML::Node noise = node["noise"];
        allow_keys(noise, "plant.noise", {"bound", "seed"});
        spec.noise_bound = real(required(noise, "bound", "plant.noise"), "plant.noise.bound");
        if (noise["seed"]) spec.noise_seed = scalar<std::uint64_t>(noise["seed"], "plant.noise.seed");
    }
    return spec;
}

void parse_controller(const YAML::Node& node, ExperimentConfig& cfg) {
    const std::string type = scalar<std::string>(required(node, "type", "controller"), "controller.type");
    const Index m = cfg.plant.input_dim();
    const Index p = cfg.plant.output_dim();
    if (type == "nonlinear") {
        allow_keys(node, "controller",
                   {"type", "N", "L", "n", "Q", "R", "S", "lambda_alpha", "lambda_sigma", "input_box", "setpoint_box",
                    "update_data"});
        cfg.controller = ControllerKind::Nonlinear;
        NlControllerConfig& c = cfg.nonlinear;
        c.N = count(required(node, "N", "controller"), "controller.N");
        c.L = count(required(node, "L", "controller"), "controller.L");
        c.n = count(required(node, "n", "controller"), "controller.n");
        c.Q = matrix(required(node, "Q", "controller"), "controller.Q", p);
        c.R = matrix(required(node, "R", "controller"), "controller.R", m);
        c.S = matrix(required(node, "S", "controller"), "controller.S", p);
        c.lambda_alpha = real(required(node, "lambda_alpha", "controller"), "controller.lambda_alpha");
        c.lambda_sigma = real(required(node, "lambda_sigma", "controller"), "controller.lambda_sigma");
        c.input_box = box(required(node, "input_box", "controller"), "controller.input_box");
        c.setpoint_box = box(required(node, "setpoint_box", "controller"), "controller.setpoint_box");
        if (node["update_data"]) c.update_data = scalar<bool>(node["update_data"], "controller.update_data");
        return;
    }
    if (type != "lti_nominal" && type != "lti_robust") {
        fail(node["type"], "controller.type must be nonlinear, lti_nominal or lti_robust, got '" + type + "'");
    }
    const bool robust = type == "lti_robust";
    if (robust) {
        allow_keys(node, "controller",
                   {"type", "L", "n", "Q", "R", "u_setpoint", "y_setpoint", "input_box", "lambda_alpha", "lambda_sigma",
                    "eps_bar"});
    } else {
        allow_keys(node, "controller", {"type", "L", "n", "Q", "R", "u_setpoint", "y_setpoint", "input_box", "output_box"});
    }
    cfg.controller = robust ? ControllerKind::LtiRobust : ControllerKind::LtiNominal;
    LtiControllerConfig& c = cfg.lti;
    c.L = count(required(node, "L", "controller"), "controller.L");
    c.n = count(required(node, "n", "controller"), "controller.n");
    c.Q = matrix(required(node, "Q", "controller"), "controller.Q", p);
    c.R = matrix(required(node, "R", "controller"), "controller.R", m);
    c.u_setpoint = vector(required(node, "u_setpoint", "controller"), "controller.u_setpoint");
    c.y_setpoint = vector(required(node, "y_setpoint", "controller"), "controller.y_setpoint");
    c.input_box = box(required(node, "input_box", "controller"), "controller.input_box");
    c.output_box = node["output_box"] ? box(node["output_box"], "controller.output_box") : Box::unbounded(p);
    if (robust) {
        c.lambda_alpha = real(required(node, "lambda_alpha", "controller"), "controller.lambda_alpha");
        c.lambda_sigma = real(required(node, "lambda_sigma", "controller"), "controller.lambda_sigma");
        c.eps_bar = real(required(node, "eps_bar", "controller"), "controller.eps_bar");
    }
}

// --- emitting ---------------------------------------------------------------

// Shortest text that reads back to the same double.
std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void emit_real(YAML::Emitter& out, double v) { out << num(v); }

void emit_vector(YAML::Emitter& out, const Vector& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Index i = 0; i < v.size(); ++i) emit_real(out, v(i));
    out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Matrix& M) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Index i = 0; i < M.rows(); ++i) emit_vector(out, M.row(i).transpose());
    out << YAML::EndSeq;
}

void emit_box(YAML::Emitter& out, const Box& b) {
    out << YAML::BeginMap;
    out << YAML::Key << "lower" << YAML::Value;
    emit_vector(out, b.lower);
    out << YAML::Key << "upper" << YAML::Value;
    emit_vector(out, b.upper);
    out << YAML::EndMap;
}

bool same_system(const LtiSystem& a, const LtiSystem& b) {
    return same_values(a.A, b.A) && same_values(a.B, b.B) && same_values(a.C, b.C) && same_values(a.D, b.D);
}

}  // namespace

std::string to_string(PlantKind kind) { return kind == PlantKind::FourTank ? "four_tank" : "lti"; }

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::Nonlinear:
            return "nonlinear";
        case ControllerKind::LtiNominal:
            return "lti_nominal";
        case ControllerKind::LtiRobust:
            return "lti_robust";
    }
    return "unknown";
}

Index PlantSpec::input_dim() const { return kind == PlantKind::FourTank ? 2 : lti.m(); }
Index PlantSpec::output_dim() const { return kind == PlantKind::FourTank ? 2 : lti.p(); }
Index PlantSpec::state_dim() const { return kind == PlantKind::FourTank ? 4 : lti.n(); }

FourTankParams PlantSpec::effective_four_tank() const {
    return perturbation_spread > 0.0 ? perturbed_four_tank(four_tank, perturbation_spread, perturbation_seed) : four_tank;
}

void ExperimentConfig::validate() const {
    const Index m = plant.input_dim();
    const Index p = plant.output_dim();
    if (plant.kind == PlantKind::FourTank) {
        plant.four_tank.validate();
        if (!(plant.perturbation_spread >= 0.0 && plant.perturbation_spread <= 0.5)) {
            throw ConfigError("plant.perturbation.spread must lie in [0, 0.5]");
        }
        if (!(plant.sample_time > 0.0)) throw ConfigError("plant.sample_time must be positive");
        if (plant.substeps < 1) throw ConfigError("plant.substeps must be at least 1");
        if (plant.substeps > 1 && plant.perturbation_spread == 0.0) {
            throw ConfigError("plant.substeps > 1 is reserved for the perturbed plant");
        }
    } else {
        try {
            plant.lti.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("plant: ") + e.what());
        }
    }
    if (plant.x0.size() != plant.state_dim()) throw ConfigError("plant.x0 has the wrong dimension");
    if (!(plant.noise_bound >= 0.0)) throw ConfigError("plant.noise.bound must be non-negative");

    if (excitation.lower.size() != m || excitation.upper.size() != m) {
        throw ConfigError("excitation bounds must have one entry per input");
    }
    if ((excitation.lower.array() > excitation.upper.array()).any()) throw ConfigError("excitation: lower exceeds upper");
    if (excitation.steps < 1) throw ConfigError("excitation.steps must be positive");
    if (steps < excitation.steps) throw ConfigError("steps must be at least excitation.steps");

    if (cost_weight.rows() != p || cost_weight.cols() != p || !is_symmetric_positive_definite(cost_weight)) {
        throw ConfigError("cost.S must be a symmetric positive definite " + std::to_string(p) + " x " + std::to_string(p) +
                          " matrix");
    }
    if (cost_start && *cost_start > steps) throw ConfigError("cost.start lies beyond the simulated steps");

    if (controller == ControllerKind::Nonlinear) {
        if (schedule.empty()) throw ConfigError("the nonlinear controller needs a setpoint schedule");
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            if (schedule[i].y_target.size() != p) throw ConfigError("schedule targets must have one entry per output");
            if (i > 0 && schedule[i].start <= schedule[i - 1].start) {
                throw ConfigError("schedule start steps must be strictly increasing");
            }
        }
        NlControllerConfig c = nonlinear;
        c.y_target = schedule.front().y_target;
        if (c.m() != m || c.p() != p) throw ConfigError("controller weights do not match the plant dimensions");
        c.validate();
        if (excitation.steps < c.N) throw ConfigError("excitation.steps must cover the data window N");
    } else {
        if (!schedule.empty()) throw ConfigError("setpoint schedules apply to the nonlinear controller only");
        if (lti.m() != m || lti.p() != p) throw ConfigError("controller weights do not match the plant dimensions");
        lti.validate(controller == ControllerKind::LtiRobust);
        if (excitation.steps < lti.L + 2 * lti.n) throw ConfigError("excitation.steps shorter than L + 2n");
    }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const PlantSpec &pa = a.plant, &pb = b.plant;
    const bool plant_eq = pa.kind == pb.kind && pa.four_tank == pb.four_tank &&
                          pa.perturbation_spread == pb.perturbation_spread &&
                          pa.perturbation_seed == pb.perturbation_seed && pa.sample_time == pb.sample_time &&
                          pa.substeps == pb.substeps && same_system(pa.lti, pb.lti) && same_values(pa.x0, pb.x0) &&
                          pa.noise_bound == pb.noise_bound && pa.noise_seed == pb.noise_seed;
    if (!plant_eq || a.name != b.name || a.controller != b.controller || a.steps != b.steps ||
        !same_values(a.cost_weight, b.cost_weight) || a.cost_start != b.cost_start || a.csv_path != b.csv_path ||
        a.record_wall_time != b.record_wall_time) {
        return false;
    }
    const ExcitationSpec &ea = a.excitation, &eb = b.excitation;
    if (!same_values(ea.lower, eb.lower) || !same_values(ea.upper, eb.upper) || ea.steps != eb.steps || ea.seed != eb.seed) {
        return false;
    }
    if (a.schedule.size() != b.schedule.size()) return false;
    for (std::size_t i = 0; i < a.schedule.size(); ++i) {
        if (a.schedule[i].start != b.schedule[i].start || !same_values(a.schedule[i].y_target, b.schedule[i].y_target)) {
            return false;
        }
    }
    if (a.controller == ControllerKind::Nonlinear) {
        const NlControllerConfig &x = a.nonlinear, &y = b.nonlinear;
        return x.N == y.N && x.L == y.L && x.n == y.n && same_values(x.Q, y.Q) && same_values(x.R, y.R) &&
               same_values(x.S, y.S) && x.lambda_alpha == y.lambda_alpha && x.lambda_sigma == y.lambda_sigma &&
               x.input_box == y.input_box && x.setpoint_box == y.setpoint_box && x.update_data == y.update_data;
    }
    const LtiControllerConfig &x = a.lti, &y = b.lti;
    const bool common = x.L == y.L && x.n == y.n && same_values(x.Q, y.Q) && same_values(x.R, y.R) &&
                        same_values(x.u_setpoint, y.u_setpoint) && same_values(x.y_setpoint, y.y_setpoint) &&
                        x.input_box == y.input_box;
    if (a.controller == ControllerKind::LtiNominal) return common && x.output_box == y.output_box;
    return common && x.lambda_alpha == y.lambda_alpha && x.lambda_sigma == y.lambda_sigma && x.eps_bar == y.eps_bar;
}

Vector target_at(const std::vector<SetpointChange>& schedule, Index t) {
    if (schedule.empty()) throw std::invalid_argument("target_at: empty schedule");
    Vector target = schedule.front().y_target;
    for (const SetpointChange& change : schedule) {
        if (change.start <= t) target = change.y_target;
    }
    return target;
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || !root.IsMap()) throw ConfigError("configuration must be a YAML mapping");
    allow_keys(root, "configuration", {"name", "steps", "plant", "excitation", "controller", "schedule", "cost", "logging"});

    ExperimentConfig cfg;
    if (root["name"]) cfg.name = scalar<std::string>(root["name"], "name");
    cfg.steps = count(required(root, "steps", "configuration"), "steps");
    cfg.plant = parse_plant(required(root, "plant", "configuration"));

    const YAML::Node ex = required(root, "excitation", "configuration");
    allow_keys(ex, "excitation", {"lower", "upper", "steps", "seed"});
    cfg.excitation.lower = vector(required(ex, "lower", "excitation"), "excitation.lower");
    cfg.excitation.upper = vector(required(ex, "upper", "excitation"), "excitation.upper");
    cfg.excitation.steps = count(required(ex, "steps", "excitation"), "excitation.steps");
    if (ex["seed"]) cfg.excitation.seed = scalar<std::uint64_t>(ex["seed"], "excitation.seed");

    parse_controller(required(root, "controller", "configuration"), cfg);

    if (root["schedule"]) {
        const YAML::Node sched = root["schedule"];
        if (!sched.IsSequence()) fail(sched, "schedule must be a list");
        for (const auto& entry : sched) {
            allow_keys(entry, "schedule entry", {"start", "y_target"});
            cfg.schedule.push_back({count(required(entry, "start", "schedule entry"), "schedule.start"),
                                    vector(required(entry, "y_target", "schedule entry"), "schedule.y_target")});
        }
    }

    const Index p = cfg.plant.output_dim();
    cfg.cost_weight = Matrix::Identity(p, p);
    if (root["cost"]) {
        const YAML::Node cost = root["cost"];
        allow_keys(cost, "cost", {"S", "start"});
        if (cost["S"]) cfg.cost_weight = matrix(cost["S"], "cost.S", p);
        if (cost["start"]) cfg.cost_start = count(cost["start"], "cost.start");
    }
    if (root["logging"]) {
        const YAML::Node log = root["logging"];
        allow_keys(log, "logging", {"csv", "wall_time"});
        if (log["csv"]) cfg.csv_path = scalar<std::string>(log["csv"], "logging.csv");
        if (log["wall_time"]) cfg.record_wall_time = scalar<bool>(log["wall_time"], "logging.wall_time");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string dump_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    if (!cfg.name.empty()) out << YAML::Key << "name" << YAML::Value << cfg.name;
    out << YAML::Key << "steps" << YAML::Value << static_cast<long long>(cfg.steps);

    const PlantSpec& pl = cfg.plant;
    out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value << to_string(pl.kind);
    if (pl.kind == PlantKind::FourTank) {
        const FourTankParams& p = pl.four_tank;
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        const std::pair<const char*, double> fields[] = {{"A1", p.A1}, {"A2", p.A2}, {"A3", p.A3}, {"A4", p.A4},
                                                         {"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3}, {"a4", p.a4},
                                                         {"gamma1", p.gamma1}, {"gamma2", p.gamma2}, {"g", p.g}};
        for (const auto& [key, value] : fields) out << YAML::Key << key << YAML::Value << num(value);
        out << YAML::EndMap;
        if (pl.perturbation_spread > 0.0) {
            out << YAML::Key << "perturbation" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "spread" << YAML::Value << num(pl.perturbation_spread);
            out << YAML::Key << "seed" << YAML::Value << pl.perturbation_seed;
            out << YAML::EndMap;
        }
        out << YAML::Key << "sample_time" << YAML::Value << num(pl.sample_time);
        out << YAML::Key << "substeps" << YAML::Value << pl.substeps;
    } else {
        out << YAML::Key << "A" << YAML::Value;
        emit_matrix(out, pl.lti.A);
        out << YAML::Key << "B" << YAML::Value;
        emit_matrix(out, pl.lti.B);
        out << YAML::Key << "C" << YAML::Value;
        emit_matrix(out, pl.lti.C);
        out << YAML::Key << "D" << YAML::Value;
        emit_matrix(out, pl.lti.D);
    }
    out << YAML::Key << "x0" << YAML::Value;
    emit_vector(out, pl.x0);
    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "bound" << YAML::Value << num(pl.noise_bound);
    out << YAML::Key << "seed" << YAML::Value << pl.noise_seed;
    out << YAML::EndMap;
    out << YAML::EndMap;

    out << YAML::Key << "excitation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lower" << YAML::Value;
    emit_vector(out, cfg.excitation.lower);
    out << YAML::Key << "upper" << YAML::Value;
    emit_vector(out, cfg.excitation.upper);
    out << YAML::Key << "steps" << YAML::Value << static_cast<long long>(cfg.excitation.steps);
    out << YAML::Key << "seed" << YAML::Value << cfg.excitation.seed;
    out << YAML::EndMap;

    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value << to_string(cfg.controller);
    if (cfg.controller == ControllerKind::Nonlinear) {
        const NlControllerConfig& c = cfg.nonlinear;
        out << YAML::Key << "N" << YAML::Value << static_cast<long long>(c.N);
        out << YAML::Key << "L" << YAML::Value << static_cast<long long>(c.L);
        out << YAML::Key << "n" << YAML::Value << static_cast<long long>(c.n);
        out << YAML::Key << "Q" << YAML::Value;
        emit_matrix(out, c.Q);
        out << YAML::Key << "R" << YAML::Value;
        emit_matrix(out, c.R);
        out << YAML::Key << "S" << YAML::Value;
        emit_matrix(out, c.S);
        out << YAML::Key << "lambda_alpha" << YAML::Value << num(c.lambda_alpha);
        out << YAML::Key << "lambda_sigma" << YAML::Value << num(c.lambda_sigma);
        out << YAML::Key << "input_box" << YAML::Value;
        emit_box(out, c.input_box);
        out << YAML::Key << "setpoint_box" << YAML::Value;
        emit_box(out, c.setpoint_box);
        out << YAML::Key << "update_data" << YAML::Value << c.update_data;
    } else {
        const LtiControllerConfig& c = cfg.lti;
        out << YAML::Key << "L" << YAML::Value << static_cast<long long>(c.L);
        out << YAML::Key << "n" << YAML::Value << static_cast<long long>(c.n);
        out << YAML::Key << "Q" << YAML::Value;
        emit_matrix(out, c.Q);
        out << YAML::Key << "R" << YAML::Value;
        emit_matrix(out, c.R);
        out << YAML::Key << "u_setpoint" << YAML::Value;
        emit_vector(out, c.u_setpoint);
        out << YAML::Key << "y_setpoint" << YAML::Value;
        emit_vector(out, c.y_setpoint);
        out << YAML::Key << "input_box" << YAML::Value;
        emit_box(out, c.input_box);
        if (cfg.controller == ControllerKind::LtiNominal) {
            out << YAML::Key << "output_box" << YAML::Value;
            emit_box(out, c.output_box);
        } else {
            out << YAML::Key << "lambda_alpha" << YAML::Value << num(c.lambda_alpha);
            out << YAML::Key << "lambda_sigma" << YAML::Value << num(c.lambda_sigma);
            out << YAML::Key << "eps_bar" << YAML::Value << num(c.eps_bar);
        }
    }
    out << YAML::EndMap;

    if (!cfg.schedule.empty()) {
        out << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
        for (const SetpointChange& change : cfg.schedule) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "start" << YAML::Value << static_cast<long long>(change.start);
            out << YAML::Key << "y_target" << YAML::Value;
            emit_vector(out, change.y_target);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    out << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "S" << YAML::Value;
    emit_matrix(out, cfg.cost_weight);
    if (cfg.cost_start) out << YAML::Key << "start" << YAML::Value << static_cast<long long>(*cfg.cost_start);
    out << YAML::EndMap;

    out << YAML::Key << "logging" << YAML::Value << YAML::BeginMap;
    if (!cfg.csv_path.empty()) out << YAML::Key << "csv" << YAML::Value << cfg.csv_path;
    out << YAML::Key << "wall_time" << YAML::Value << cfg.record_wall_time;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("cannot write configuration file " + path);
    file << dump_config(cfg);
    if (!file) throw IoError("error while writing " + path);
}

// --- builtin configurations ----------------------------------------------

namespace {

ExperimentConfig four_tank_base() {
    ExperimentConfig cfg;
    cfg.name = "fourtank_nominal";
    cfg.plant.kind = PlantKind::FourTank;
    cfg.plant.x0 = Vector::Zero(4);
    cfg.controller = ControllerKind::Nonlinear;
    NlControllerConfig& c = cfg.nonlinear;
    c.N = 150;
    c.L = 35;
    c.n = 3;
    c.Q = Matrix::Identity(2, 2);
    c.R = 2.0 * Matrix::Identity(2, 2);
    c.S = 20.0 * Matrix::Identity(2, 2);
    c.lambda_alpha = 5e-5;
    c.lambda_sigma = 2e5;
    c.input_box = Box::uniform(2, 0.0, 60.0);
    c.setpoint_box = Box::uniform(2, 0.6, 59.4);
    cfg.excitation = {Vector::Constant(2, 20.0), Vector::Constant(2, 30.0), 150, 1};
    cfg.steps = 501;
    cfg.schedule = {{0, Vector::Constant(2, 15.0)}};
    cfg.cost_weight = 20.0 * Matrix::Identity(2, 2);
    return cfg;
}

// Fixed, lightly damped two-state test plant for the LTI demos.
LtiSystem demo_system() {
    LtiSystem sys;
    sys.A = (Matrix(2, 2) << 0.7, 0.2, -0.1, 0.8).finished();
    sys.B = (Matrix(2, 1) << 0.5, 1.0).finished();
    sys.C = (Matrix(1, 2) << 1.0, 0.0).finished();
    sys.D = Matrix::Zero(1, 1);
    return sys;
}

ExperimentConfig lti_base() {
    ExperimentConfig cfg;
    cfg.plant.kind = PlantKind::Lti;
    cfg.plant.lti = demo_system();
    cfg.plant.x0 = (Vector(2) << 1.0, -1.0).finished();
    cfg.excitation = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), 60, 1};
    cfg.steps = 160;
    cfg.cost_weight = Matrix::Identity(1, 1);
    LtiControllerConfig& c = cfg.lti;
    c.L = 10;
    c.n = 2;
    c.Q = Matrix::Identity(1, 1);
    c.R = 0.1 * Matrix::Identity(1, 1);
    c.u_setpoint = Vector::Constant(1, 0.5);
    c.y_setpoint = cfg.plant.lti.steady_state(c.u_setpoint).second;
    c.input_box = Box::uniform(1, -2.0, 2.0);
    c.output_box = Box::unbounded(1);
    return cfg;
}

}  // namespace

std::vector<std::string> builtin_config_names() {
    return {"fourtank_nominal", "fourtank_schedule", "fourtank_perturbed", "lti_nominal_demo", "lti_robust_demo"};
}

ExperimentConfig builtin_config(const std::string& name) {
    if (name == "fourtank_nominal") return four_tank_base();
    if (name == "fourtank_perturbed" || name == "fourtank_schedule") {
        ExperimentConfig cfg = four_tank_base();
        cfg.name = name;
        cfg.plant.perturbation_spread = 0.15;
        cfg.plant.perturbation_seed = 1;
        cfg.plant.substeps = 10;
        if (name == "fourtank_schedule") {
            cfg.steps = 1201;
            cfg.schedule.push_back({601, Vector::Constant(2, 11.0)});
        }
        return cfg;
    }
    if (name == "lti_nominal_demo") {
        ExperimentConfig cfg = lti_base();
        cfg.name = name;
        cfg.controller = ControllerKind::LtiNominal;
        cfg.lti.output_box = Box::uniform(1, -3.0, 3.0);
        return cfg;
    }
    if (name == "lti_robust_demo") {
        ExperimentConfig cfg = lti_base();
        cfg.name = name;
        cfg.controller = ControllerKind::LtiRobust;
        cfg.excitation.steps = 120;
        cfg.steps = 320;
        cfg.lti.L = 12;
        cfg.lti.lambda_alpha = 0.1;
        cfg.lti.lambda_sigma = 1000.0;
        cfg.lti.eps_bar = 0.01;
        cfg.plant.noise_bound = 0.01;
        cfg.plant.noise_seed = 2;
        return cfg;
    }
    throw ConfigError("unknown builtin configuration '" + name + "'");
}

ExperimentConfig resolve_config(const std::string& name_or_path) {
    for (const std::string& name : builtin_config_names()) {
        if (name == name_or_path) return builtin_config(name);
    }
    return load_config(name_or_path);
}

}  // namespace ddmpc
