#include "treeforge/cosim.hpp"

#include "baselang_detail.hpp"
#include "treeforge/lexer.hpp"
#include "treeforge/text.hpp"
#include "treeforge/treekit.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

namespace treeforge::cosim {

namespace {

constexpr double kTimeTol = 1e-9;

using baselang::Access;
using baselang::Type;
using baselang::detail::Cursor;
using treekit::Node;

double parse_real_literal(Cursor& cur) {
    bool negative = cur.eat_punct("-");
    const Token& tok = cur.take();
    double v = 0.0;
    if (tok.is(TokenKind::Real))
        v = tok.real_value;
    else if (tok.is(TokenKind::Int))
        v = static_cast<double>(tok.int_value);
    else
        throw Error(ErrorCode::SyntaxError,
                    "expected a numeric literal, got '" + tok.text + "'", tok.span);
    return negative ? -v : v;
}

void parse_plant_section(Cursor& cur, const treekit::SchemaPtr& schema, PlantSpec& plant) {
    for (;;) {
        const Token& tok = cur.peek();
        if (tok.is_ident("state")) {
            cur.take();
            const Token& name = cur.expect_ident("plant state name");
            for (const PlantState& existing : plant.states)
                if (existing.name == name.text)
                    throw Error(ErrorCode::DuplicateName,
                                "plant state '" + name.text + "' is defined twice", name.span);
            cur.expect_punct(":=");
            double init = parse_real_literal(cur);
            plant.states.push_back({name.text, init});
        } else if (tok.is_ident("deriv")) {
            cur.take();
            const Token& name = cur.expect_ident("plant state name");
            cur.expect_punct(":=");
            NodePtr exp = baselang::detail::parse_exp(cur, schema);
            if (!plant.derivatives.emplace(name.text, std::move(exp)).second)
                throw Error(ErrorCode::DuplicateName,
                            "plant state '" + name.text + "' has two derivatives", name.span);
        } else if (tok.is_ident("output")) {
            cur.take();
            const Token& shared = cur.expect_ident("shared variable name");
            cur.expect_punct("<");
            cur.expect_punct("-");
            const Token& source = cur.expect_ident("plant state name");
            if (!plant.outputs.emplace(shared.text, source.text).second)
                throw Error(ErrorCode::DuplicateName,
                            "shared variable '" + shared.text + "' has two outputs",
                            shared.span);
        } else if (tok.is_ident("h")) {
            cur.take();
            cur.expect_punct(":=");
            plant.h = parse_real_literal(cur);
        } else {
            break;
        }
    }
}

void parse_cosim_section(Cursor& cur, Scenario& sc) {
    bool have_sync = false;
    bool have_end = false;
    for (;;) {
        const Token& tok = cur.peek();
        if (tok.is_ident("H")) {
            cur.take();
            cur.expect_punct(":=");
            sc.config.sync_step = parse_real_literal(cur);
            have_sync = true;
        } else if (tok.is_ident("end")) {
            cur.take();
            cur.expect_punct(":=");
            sc.config.end_time = parse_real_literal(cur);
            have_end = true;
        } else if (tok.is_ident("agenda")) {
            cur.take();
            const Token& op = cur.expect_ident("operation name");
            cur.expect_kw("every");
            double period = parse_real_literal(cur);
            sc.agenda.push_back({op.text, period});
        } else {
            break;
        }
    }
    if (!have_sync || !have_end)
        throw Error(ErrorCode::InvalidConfig,
                    "the cosim section must set both H and end", cur.peek().span);
}

std::set<std::string> shared_names(const BaseModule& module) {
    std::set<std::string> out;
    for (const auto& def : module.states)
        if (def.shared)
            out.insert(def.name);
    return out;
}

/// Substep count for one sync interval; the step size must tile it exactly.
std::int64_t substeps_per_sync(const PlantSpec& plant, const CosimConfig& config) {
    if (!(plant.h > 0.0))
        throw Error(ErrorCode::InvalidConfig, "plant step h must be positive");
    if (!(config.sync_step > 0.0))
        throw Error(ErrorCode::InvalidConfig, "sync step H must be positive");
    if (plant.h > config.sync_step + kTimeTol)
        throw Error(ErrorCode::InvalidConfig,
                    "plant step h = " + format_real(plant.h) +
                        " exceeds sync step H = " + format_real(config.sync_step));
    auto m = static_cast<std::int64_t>(std::llround(config.sync_step / plant.h));
    if (m < 1 || std::abs(static_cast<double>(m) * plant.h - config.sync_step) > kTimeTol)
        throw Error(ErrorCode::InvalidConfig,
                    "sync step H = " + format_real(config.sync_step) +
                        " is not a whole number of plant steps h = " + format_real(plant.h));
    return m;
}

std::int64_t sync_point_count(const CosimConfig& config) {
    if (config.end_time < 0.0)
        throw Error(ErrorCode::InvalidConfig, "end time must not be negative");
    auto n = static_cast<std::int64_t>(std::llround(config.end_time / config.sync_step));
    if (std::abs(static_cast<double>(n) * config.sync_step - config.end_time) > kTimeTol)
        throw Error(ErrorCode::InvalidConfig,
                    "end time " + format_real(config.end_time) +
                        " is not a whole number of sync steps H = " +
                        format_real(config.sync_step));
    return n;
}

void validate_scenario(Scenario& sc) {
    const BaseModule& m = sc.module;
    std::set<std::string> shared = shared_names(m);

    std::set<std::string> plant_names;
    for (const PlantState& ps : sc.plant.states)
        plant_names.insert(ps.name);

    for (const auto& [name, exp] : sc.plant.derivatives)
        if (!plant_names.count(name))
            throw Error(ErrorCode::UnboundName,
                        "derivative given for unknown plant state '" + name + "'",
                        exp->span);
    for (const PlantState& ps : sc.plant.states)
        if (!sc.plant.derivatives.count(ps.name))
            throw Error(ErrorCode::InvalidConfig,
                        "plant state '" + ps.name + "' has no derivative");

    for (const auto& [shared_name, source] : sc.plant.outputs) {
        const baselang::StateDef* def = m.find_state(shared_name);
        if (!def || !def->shared)
            throw Error(ErrorCode::UnboundName,
                        "output target '" + shared_name + "' is not a shared state variable");
        if (def->type != Type::Real)
            throw Error(ErrorCode::InvalidConfig,
                        "output target '" + shared_name + "' must be declared real",
                        def->span);
        if (!plant_names.count(source))
            throw Error(ErrorCode::UnboundName,
                        "output source '" + source + "' is not a plant state");
    }

    // Type the derivatives: plant states are reals and shadow same-named
    // shared variables; the remaining shared variables keep declared types.
    baselang::TypeEnv env;
    for (const PlantState& ps : sc.plant.states)
        env.emplace_back(ps.name, Type::Real);
    for (const auto& def : m.states)
        if (def.shared && !plant_names.count(def.name))
            env.emplace_back(def.name, def.type);

    sc.plant.inputs.clear();
    for (const auto& [name, exp] : sc.plant.derivatives) {
        std::vector<Diagnostic> diags;
        Type t = baselang::check_exp(m, exp, env, diags);
        if (!diags.empty())
            throw Error(ErrorCode::InvalidConfig, "derivative of '" + name + "' is ill-typed: " +
                                                      diags.front().render(),
                        exp->span);
        if (t != Type::Int && t != Type::Real && t != Type::Unknown)
            throw Error(ErrorCode::InvalidConfig,
                        "derivative of '" + name + "' must be numeric, got " +
                            std::string(baselang::type_name(t)),
                        exp->span);
        for (const NodePtr& node : treekit::traverse(exp, treekit::Order::Pre))
            if (node->alternative == "VarRef") {
                const std::string& ref = node->str_field("name");
                if (shared.count(ref) && !plant_names.count(ref))
                    sc.plant.inputs.insert(ref);
            }
    }

    substeps_per_sync(sc.plant, sc.config);
    sync_point_count(sc.config);

    for (const AgendaEntry& entry : sc.agenda) {
        const baselang::OperationDef* op = m.find_operation(entry.op_name);
        if (!op)
            throw Error(ErrorCode::UnboundName,
                        "agenda names unknown operation '" + entry.op_name + "'");
        if (!op->params.empty())
            throw Error(ErrorCode::InvalidConfig,
                        "agenda operation '" + entry.op_name + "' must take no arguments",
                        op->span);
        if (!(entry.period > 0.0))
            throw Error(ErrorCode::InvalidConfig,
                        "agenda period for '" + entry.op_name + "' must be positive");
    }
}

State snapshot_shared(const DeSession& session) {
    State out;
    for (const std::string& name : session.shared_vars) {
        auto it = session.state.find(name);
        if (it != session.state.end())
            out.emplace(name, it->second);
    }
    return out;
}

} // namespace

Scenario parse_scenario(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    Cursor cur{buf};
    Scenario sc;
    treekit::SchemaPtr schema = baselang::schema();
    sc.module = baselang::detail::parse_module_body(cur, schema, {"plant", "cosim"});

    if (!cur.eat_kw("plant"))
        throw Error(ErrorCode::InvalidConfig, "scenario has no plant section",
                    cur.peek().span);
    parse_plant_section(cur, schema, sc.plant);

    if (!cur.eat_kw("cosim"))
        throw Error(ErrorCode::InvalidConfig, "scenario has no cosim section",
                    cur.peek().span);
    parse_cosim_section(cur, sc);

    if (!cur.at_end())
        cur.fail("unexpected input after the cosim section");

    validate_scenario(sc);
    return sc;
}

DeSession make_session(const Scenario& scenario) {
    DeSession s;
    s.module = scenario.module;
    s.state = baselang::initial_state(scenario.module);
    s.shared_vars = shared_names(scenario.module);
    s.agenda = scenario.agenda;
    for (const AgendaEntry& entry : s.agenda) {
        if (!(entry.period > 0.0))
            throw Error(ErrorCode::InvalidConfig,
                        "agenda period for '" + entry.op_name + "' must be positive");
        s.next_invocation.push_back(1);
    }
    return s;
}

RunUntilResult run_until(DeSession& session, double time_bound) {
    if (time_bound < session.clock - kTimeTol)
        throw Error(ErrorCode::BoundsError,
                    "time bound " + format_real(time_bound) +
                        " is before the session clock " + format_real(session.clock));
    RunUntilResult out;
    for (;;) {
        size_t best = session.agenda.size();
        double best_time = 0.0;
        for (size_t i = 0; i < session.agenda.size(); ++i) {
            double t = static_cast<double>(session.next_invocation[i]) *
                       session.agenda[i].period;
            if (t > time_bound + kTimeTol)
                continue;
            if (best == session.agenda.size() || t < best_time - kTimeTol) {
                best = i;
                best_time = t;
            }
        }
        if (best == session.agenda.size())
            break;

        const std::string& op = session.agenda[best].op_name;
        double scheduled = best_time;
        auto observer = [&](const std::string& name, Access access,
                            const baselang::Value& value) {
            if (session.shared_vars.count(name)) {
                AccessRecord rec{scheduled, name, access, value};
                session.access_log.push_back(rec);
                out.accesses.push_back(std::move(rec));
            }
        };
        try {
            baselang::ExecResult r =
                baselang::exec_operation(session.module, session.state, op, {}, observer);
            session.state = std::move(r.state);
        } catch (const Error& e) {
            throw Error(e.code(), "at t=" + format_real(scheduled) + " in operation '" +
                                      op + "': " + e.message(),
                        e.span());
        }
        out.events.emplace_back(scheduled, op);
        ++session.next_invocation[best];
    }
    session.clock = time_bound;
    return out;
}

PlantValues initial_plant_values(const PlantSpec& plant) {
    PlantValues out;
    for (const PlantState& ps : plant.states)
        out.emplace(ps.name, ps.initial);
    return out;
}

PlantValues plant_step(const BaseModule& module, const PlantSpec& plant,
                       const PlantValues& state, const State& inputs, double h) {
    std::map<std::string, baselang::Value> env;
    for (const auto& [name, value] : state)
        env.emplace(name, baselang::Value::of_real(value));
    for (const std::string& name : plant.inputs) {
        auto it = inputs.find(name);
        if (it == inputs.end())
            throw Error(ErrorCode::UnboundName,
                        "plant input '" + name + "' has no value");
        env.emplace(name, it->second);
    }

    // Forward Euler: all slopes come from the pre-step state, then every
    // state advances at once.
    PlantValues next = state;
    for (const auto& [name, exp] : plant.derivatives) {
        baselang::Value v = baselang::evaluate_exp(module, exp, env);
        if (v.type() != Type::Int && v.type() != Type::Real)
            throw Error(ErrorCode::EvalError,
                        "derivative of '" + name + "' evaluated to " +
                            std::string(baselang::type_name(v.type())),
                        exp->span);
        next.at(name) = state.at(name) + h * v.as_real();
    }
    return next;
}

CosimResult cosimulate(const Scenario& scenario) {
    std::int64_t substeps = substeps_per_sync(scenario.plant, scenario.config);
    std::int64_t syncs = sync_point_count(scenario.config);

    CosimResult out;
    out.session = make_session(scenario);
    DeSession& session = out.session;
    PlantValues plant = initial_plant_values(scenario.plant);

    out.timeline.push_back({0.0, plant, snapshot_shared(session), {}});

    for (std::int64_t k = 0; k < syncs; ++k) {
        // Master exchange, plant first: fresh plant outputs are visible to
        // every discrete event in the coming interval. These copies are not
        // operation accesses, so they stay out of the access log.
        for (const auto& [shared_name, source] : scenario.plant.outputs)
            session.state.at(shared_name) = baselang::Value::of_real(plant.at(source));

        double bound = static_cast<double>(k + 1) * scenario.config.sync_step;
        RunUntilResult r = run_until(session, bound);

        // The discrete side's shared values are frozen over the interval.
        State inputs = snapshot_shared(session);
        try {
            for (std::int64_t j = 0; j < substeps; ++j)
                plant = plant_step(scenario.module, scenario.plant, plant, inputs,
                                   scenario.plant.h);
        } catch (const Error& e) {
            throw Error(e.code(), "at t=" + format_real(bound) + " in the plant: " +
                                      e.message(),
                        e.span());
        }

        out.timeline.push_back({bound, plant, snapshot_shared(session), std::move(r.events)});
    }

    out.access_log = session.access_log;
    return out;
}

std::string render_timeline(const std::vector<TimelineRow>& timeline) {
    std::string out;
    for (const TimelineRow& row : timeline) {
        out += format_real(row.t);
        out += '\t';
        if (row.plant.empty())
            out += '-';
        std::size_t i = 0;
        for (const auto& [name, value] : row.plant) {
            if (i++ > 0)
                out += ' ';
            out += name;
            out += '=';
            out += format_real(value);
        }
        out += '\t';
        if (row.shared.empty())
            out += '-';
        i = 0;
        for (const auto& [name, value] : row.shared) {
            if (i++ > 0)
                out += ' ';
            out += name;
            out += '=';
            out += value.render();
        }
        out += '\t';
        if (row.events.empty())
            out += '-';
        i = 0;
        for (const auto& [time, op] : row.events) {
            if (i++ > 0)
                out += ' ';
            out += op;
            out += '@';
            out += format_real(time);
        }
        out += '\n';
    }
    return out;
}

std::string render_access_log(const std::vector<AccessRecord>& log) {
    std::string out;
    for (const AccessRecord& rec : log) {
        out += format_real(rec.time);
        out += '\t';
        out += rec.name;
        out += '\t';
        out += rec.access == Access::Read ? "read" : "write";
        out += '\t';
        out += rec.value.render();
        out += '\n';
    }
    return out;
}

} // namespace treeforge::cosim
