#include "tpg/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tpg/error.hpp"

namespace tpg {

using nlohmann::json;

namespace {

json encode_instruction(const Instruction& ins)
{
    return json::array({static_cast<int>(ins.op), static_cast<int>(ins.target_bank), ins.target_idx,
                        static_cast<int>(ins.op1_bank), ins.op1_idx, static_cast<int>(ins.op2_bank), ins.op2_idx});
}

Instruction decode_instruction(const json& j)
{
    if (!j.is_array() || j.size() != 7) {
        throw DataError("instruction record must have 7 fields");
    }
    Instruction ins;
    ins.op = static_cast<Opcode>(j[0].get<int>());
    ins.target_bank = static_cast<Bank>(j[1].get<int>());
    ins.target_idx = j[2].get<std::int32_t>();
    ins.op1_bank = static_cast<Bank>(j[3].get<int>());
    ins.op1_idx = j[4].get<std::int32_t>();
    ins.op2_bank = static_cast<Bank>(j[5].get<int>());
    ins.op2_idx = j[6].get<std::int32_t>();
    if (!is_valid(ins)) {
        throw DataError("invalid instruction record");
    }
    return ins;
}

json encode_scores(const TaskScores& s) { return json(std::vector<double>(s.begin(), s.end())); }

TaskScores decode_scores(const json& j)
{
    auto v = j.get<std::vector<double>>();
    if (v.size() != kTaskCount) {
        throw DataError("score vector must have one entry per task");
    }
    TaskScores out {};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

} // namespace

std::string serialize_checkpoint(const EvolutionState& state, const std::string& output_dir)
{
    json doc;
    doc["format"] = "tpg-checkpoint";
    doc["version"] = kCheckpointVersion;

    json config = json::object();
    for (const auto& [k, v] : to_pairs(RunConfig {state.params, output_dir})) {
        config[k] = v;
    }
    doc["config"] = config;
    doc["generation"] = state.generation;
    doc["rng"] = state.rng.state();
    doc["ids"] = {{"program", state.pop.ids.next_program},
                  {"team", state.pop.ids.next_team},
                  {"bank", state.pop.ids.next_bank}};

    json banks = json::array();
    for (const auto& [id, bank] : state.pop.banks) {
        banks.push_back(id);
    }
    doc["banks"] = banks;

    json programs = json::array();
    for (const auto& [id, prog] : state.pop.programs) {
        json p;
        p["id"] = id;
        const auto& action = prog->action();
        if (const auto* ref = std::get_if<TeamRef>(&action)) {
            p["action"] = {{"team", ref->team}};
        } else {
            p["action"] = {{"discrete", std::get<DiscreteAction>(action).value}};
        }
        p["memory"] = prog->memory_ref();
        json code = json::array();
        for (const auto& ins : prog->instructions()) {
            code.push_back(encode_instruction(ins));
        }
        p["code"] = code;
        programs.push_back(std::move(p));
    }
    doc["programs"] = programs;

    json teams = json::array();
    for (const auto& [id, team] : state.pop.teams) {
        teams.push_back({{"id", id}, {"programs", team.programs}});
    }
    doc["teams"] = teams;

    json scores = json::array();
    for (const auto& [id, s] : state.scores) {
        scores.push_back({{"team", id}, {"mean", encode_scores(s)}});
    }
    doc["scores"] = scores;

    json tests = json::array();
    for (const auto& [id, s] : state.test_cache) {
        tests.push_back({{"team", id}, {"mean", encode_scores(s)}});
    }
    doc["tests"] = tests;

    json archive = json::array();
    for (const auto& e : state.archive) {
        archive.push_back({{"gen", e.generation},
                           {"set", e.set},
                           {"team", e.team},
                           {"fitness", e.training_fitness},
                           {"test", encode_scores(e.test_mean)}});
    }
    doc["archive"] = archive;
    return doc.dump();
}

Checkpoint parse_checkpoint(std::string_view text)
{
    Checkpoint cp;
    try {
        json doc = json::parse(text);
        if (doc.value("format", "") != "tpg-checkpoint") {
            throw DataError("not a checkpoint file");
        }
        if (doc.at("version").get<int>() != kCheckpointVersion) {
            throw DataError("unsupported checkpoint version " + doc.at("version").dump());
        }
        ConfigPairs pairs;
        for (const auto& [k, v] : doc.at("config").items()) {
            pairs.emplace_back(k, v.get<std::string>());
        }
        cp.config = apply_pairs(RunConfig {}, pairs);

        EvolutionState& st = cp.state;
        st.params = cp.config.params;
        st.generation = doc.at("generation").get<std::size_t>();
        st.rng.set_state(doc.at("rng").get<std::string>());

        auto& pop = st.pop;
        for (const auto& b : doc.at("banks")) {
            auto id = b.get<BankId>();
            pop.banks.emplace(id, MemoryBank {id, {}});
        }
        for (const auto& p : doc.at("programs")) {
            std::vector<Instruction> code;
            for (const auto& ins : p.at("code")) {
                code.push_back(decode_instruction(ins));
            }
            if (code.empty()) {
                throw DataError("program with no instructions");
            }
            const auto& a = p.at("action");
            Action action = a.contains("team") ? Action {TeamRef {a.at("team").get<TeamId>()}}
                                               : Action {DiscreteAction {a.at("discrete").get<int>()}};
            if (const auto* d = std::get_if<DiscreteAction>(&action); d && (d->value < 0 || d->value > 2)) {
                throw DataError("discrete action out of range: " + std::to_string(d->value));
            }
            auto memory = p.at("memory").get<BankId>();
            if (!pop.banks.contains(memory)) {
                throw DataError("program refers to unknown bank " + std::to_string(memory));
            }
            pop.add_program(Program(p.at("id").get<ProgramId>(), std::move(code), action, memory));
        }
        for (const auto& t : doc.at("teams")) {
            Team team;
            team.id = t.at("id").get<TeamId>();
            team.programs = t.at("programs").get<std::vector<ProgramId>>();
            for (auto pid : team.programs) {
                if (!pop.programs.contains(pid)) {
                    throw DataError("team refers to unknown program " + std::to_string(pid));
                }
            }
            if (!pop.satisfies_invariants(team)) {
                throw DataError("team " + std::to_string(team.id) + " needs two distinct programs and a leaf");
            }
            pop.add_team(std::move(team));
        }
        for (const auto& [id, prog] : pop.programs) {
            if (const auto* ref = std::get_if<TeamRef>(&prog->action()); ref && !pop.has_team(ref->team)) {
                throw DataError("program " + std::to_string(id) + " points at unknown team");
            }
        }
        const auto& ids = doc.at("ids");
        pop.ids.next_program = ids.at("program").get<ProgramId>();
        pop.ids.next_team = ids.at("team").get<TeamId>();
        pop.ids.next_bank = ids.at("bank").get<BankId>();

        for (const auto& s : doc.at("scores")) {
            auto id = s.at("team").get<TeamId>();
            if (!pop.has_team(id)) {
                throw DataError("score for unknown team " + std::to_string(id));
            }
            st.scores[id] = decode_scores(s.at("mean"));
        }
        for (const auto& s : doc.at("tests")) {
            st.test_cache[s.at("team").get<TeamId>()] = decode_scores(s.at("mean"));
        }
        for (const auto& e : doc.at("archive")) {
            ArchiveEntry entry;
            entry.generation = e.at("gen").get<std::size_t>();
            entry.set = e.at("set").get<TaskMask>();
            entry.team = e.at("team").get<TeamId>();
            entry.training_fitness = e.at("fitness").get<double>();
            entry.test_mean = decode_scores(e.at("test"));
            st.archive.push_back(entry);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint config: ") + e.what());
    }
    return cp;
}

void write_checkpoint(const EvolutionState& state, const std::string& output_dir, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write checkpoint " + tmp.string());
        }
        out << serialize_checkpoint(state, output_dir);
        out.flush();
        if (!out) {
            throw DataError("failed writing checkpoint " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw DataError("cannot move checkpoint into place: " + ec.message());
    }
}

Checkpoint read_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read checkpoint " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str());
}

} // namespace tpg
