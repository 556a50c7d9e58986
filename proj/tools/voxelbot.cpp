// voxelbot: server, agent, scripted client and dataset tools.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "voxelbot/agent.hpp"
#include "voxelbot/data_io.hpp"
#include "voxelbot/gateway.hpp"
#include "voxelbot/net.hpp"
#include "voxelbot/parser.hpp"
#include "voxelbot/perception.hpp"
#include "voxelbot/play.hpp"
#include "voxelbot/server.hpp"

using namespace voxelbot;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

Bounds parse_bounds(const std::string& s) {
    Bounds b;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(s);
    if (!(in >> b.size_x >> c1 >> b.size_y >> c2 >> b.size_z) || c1 != ',' || c2 != ',' || b.size_x <= 0 || b.size_y <= 0 ||
        b.size_z <= 0) {
        throw CLI::ValidationError("--bounds", "expected X,Y,Z with positive sizes");
    }
    return b;
}

struct WorldOpts {
    std::string bounds = "256,128,256";
    std::int32_t ground_y = 62;

    void add(CLI::App* app) {
        app->add_option("--bounds", bounds, "World size X,Y,Z")->capture_default_str();
        app->add_option("--ground-y", ground_y, "Flat terrain height (negative for an empty world)")->capture_default_str();
    }
    [[nodiscard]] ServerConfig config() const {
        ServerConfig c;
        c.bounds = parse_bounds(bounds);
        c.ground_y = ground_y;
        return c;
    }
};

int cmd_serve(const WorldOpts& w, std::uint16_t port, const std::string& host, const std::string& record, std::uint64_t seed,
              int gateway_port, int tick_ms) {
    ServerConfig cfg = w.config();
    cfg.seed = seed;
    WorldServer core(cfg);
    if (!record.empty()) core.record_to(record);
    TcpServer tcp(core, port, host);
    std::unique_ptr<Gateway> gateway;
    if (gateway_port >= 0) {
        gateway = std::make_unique<Gateway>(core, tcp.mutex(), BlockRegistry::builtin());
        const auto gp = gateway->start(static_cast<std::uint16_t>(gateway_port), host);
        std::cerr << "gateway on http://" << host << ":" << gp << '\n';
    }
    std::cerr << "serving on " << host << ":" << tcp.port() << '\n';
    tcp.run(g_stop, tick_ms);
    if (gateway) gateway->stop();
    return 0;
}

int cmd_agent(const std::string& server, const std::string& name, const std::string& grammar_path,
              const std::string& profanity_path, const std::string& dances_path, bool vision_only) {
    const auto [host, port] = parse_host_port(server);
    TcpTransport transport(host, port);
    std::optional<Grammar> grammar;
    if (!grammar_path.empty()) grammar = Grammar::load(grammar_path);
    std::optional<DanceRegistry> dances;
    if (!dances_path.empty()) dances = DanceRegistry::load(dances_path);
    AgentConfig cfg;
    cfg.name = name;
    cfg.grammar = grammar ? &*grammar : nullptr;
    cfg.dances = dances ? &*dances : nullptr;
    if (!profanity_path.empty()) cfg.profanity = ProfanityFilter::load(profanity_path);
    cfg.perception.vision_only = vision_only;
    Agent agent(transport, std::move(cfg));
    agent.login();
    const AgentSummary s = agent.run(g_stop);
    std::cout << nlohmann::json{{"chats_handled", s.chats_handled},
                                {"tasks_completed", s.tasks_completed},
                                {"tasks_interrupted", s.tasks_interrupted},
                                {"steps", s.steps}}
                     .dump()
              << '\n';
    return agent.state() == AgentState::disconnected && !g_stop ? 1 : 0;
}

int cmd_play(const std::string& script_path, const std::string& server, const PlayOptions& opts, const std::string& transcript) {
    std::vector<PlayCommand> script;
    if (script_path.empty() || script_path == "-") {
        script = parse_play_script(std::cin);
    } else {
        std::ifstream in(script_path);
        if (!in) throw std::runtime_error("cannot open " + script_path);
        script = parse_play_script(in);
    }
    PlayResult r;
    if (!script.empty()) {
        const auto [host, port] = parse_host_port(server);
        TcpTransport transport(host, port);
        r = run_play_script(transport, script, opts);
    }
    std::ofstream file;
    if (!transcript.empty()) {
        file.open(transcript);
        if (!file) throw std::runtime_error("cannot write " + transcript);
    }
    std::ostream& out = transcript.empty() ? std::cout : file;
    for (const auto& line : r.transcript) out << line << '\n';
    if (!r.passed) std::cerr << r.failures << " of " << r.assertions << " assertions failed\n";
    return r.passed ? 0 : 1;
}

int cmd_replay(const WorldOpts& w, const std::string& path) {
    const auto events = read_house_log(path);
    VoxelWorld world = initial_world(w.config());
    replay(events, world);
    std::cout << "events " << events.size() << "\nnon_air " << world.non_air_count() << "\nhash " << hash_hex(world.hash()) << '\n';
    return 0;
}

int cmd_gen_data(const std::string& grammar_path, std::uint64_t seed, std::size_t n, const std::string& out_path) {
    const Grammar grammar = grammar_path.empty() ? Grammar::builtin() : Grammar::load(grammar_path);
    const Lexicons lex = make_lexicons(grammar, BlockRegistry::builtin(), SizeLexicon{}, DanceRegistry::builtin());
    std::vector<ParsePair> pairs;
    for (auto& g : generate(grammar, lex, seed, n)) pairs.push_back({std::move(g.dialogue), std::move(g.dict), {}});
    if (out_path.empty() || out_path == "-") {
        write_parse_dataset(std::cout, pairs);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        write_parse_dataset(out, pairs);
    }
    return 0;
}

int cmd_dump_memory(const WorldOpts& w, const std::string& record, const std::string& server, const std::string& name,
                    const std::string& segmentation) {
    MemoryStore memory;
    PerceptionConfig pc;
    pc.natural = default_natural_blocks();
    if (!server.empty()) {
        const auto [host, port] = parse_host_port(server);
        TcpTransport transport(host, port);
        AgentConfig cfg;
        cfg.name = name;
        Agent agent(transport, std::move(cfg));
        agent.login();
        for (int i = 0; i < 250 && agent.state() == AgentState::connecting; ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            agent.step();
        }
        if (agent.state() != AgentState::running) throw std::runtime_error("no snapshot from " + server);
        VoxelWorld world = agent.world();
        refresh_block_objects(memory, world, full_region(world), BlockRegistry::builtin(), pc);
        refresh_mobs(memory, world);
    } else {
        VoxelWorld world = initial_world(w.config());
        if (!record.empty()) replay(read_house_log(record), world);
        refresh_block_objects(memory, world, full_region(world), BlockRegistry::builtin(), pc);
    }
    if (!segmentation.empty()) {
        std::ifstream in(segmentation);
        if (!in) throw std::runtime_error("cannot open " + segmentation);
        ingest_segmentation_file(memory, in);
    }
    memory.dump_jsonl(std::cout);
    return 0;
}

int cmd_validate(const std::string& path, const std::string& kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::size_t items = 0;
    std::size_t problems = 0;
    if (kind == "parse") {
        const auto pairs = read_parse_dataset(in);
        items = pairs.size();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            std::vector<std::size_t> counts;
            for (const auto& t : tokenize(pairs[i].dialogue)) counts.push_back(t.size());
            for (const auto& e : validate(pairs[i].dict, &counts)) {
                std::cerr << "pair " << i << ": " << e << '\n';
                ++problems;
            }
        }
    } else if (kind == "house") {
        items = read_house_log(in).size();
    } else if (kind == "segmentation") {
        items = read_segmentation(in).size();
    } else if (kind == "segmentation-nested") {
        items = import_segmentation_nested(in).size();
    } else if (kind == "grammar") {
        items = Grammar::parse(in).templates().size();
    } else if (kind == "play") {
        items = parse_play_script(in).size();
    } else {
        throw CLI::ValidationError("--kind", "unknown kind '" + kind + "'");
    }
    std::cout << (problems ? "invalid " : "ok ") << items << " items";
    if (problems) std::cout << ", " << problems << " problems";
    std::cout << '\n';
    return problems ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxelbot: voxel world server, assistant agent and dataset tools"};
    app.require_subcommand(1);

    WorldOpts world_opts;

    auto* serve = app.add_subcommand("serve", "Run the world server");
    std::uint16_t port = 25565;
    std::string host = "127.0.0.1";
    std::string record;
    std::uint64_t seed = 0;
    int gateway_port = -1;
    int tick_ms = 50;
    serve->add_option("--port", port, "TCP port (0 picks one)")->capture_default_str();
    serve->add_option("--host", host, "Listen address")->capture_default_str();
    serve->add_option("--record", record, "Write the session record (one JSON event per line)");
    serve->add_option("--seed", seed, "Seed for mob wandering")->capture_default_str();
    serve->add_option("--gateway-port", gateway_port, "HTTP gateway port for the browser client (0 picks one)");
    serve->add_option("--tick-ms", tick_ms, "Milliseconds per tick")->capture_default_str();
    world_opts.add(serve);

    auto* agent = app.add_subcommand("agent", "Run the assistant agent");
    std::string server = "127.0.0.1:25565";
    std::string name = "bot";
    std::string grammar;
    std::string profanity;
    std::string dances;
    bool vision_only = false;
    agent->add_option("--server", server, "HOST:PORT")->capture_default_str();
    agent->add_option("--name", name, "Player name")->capture_default_str();
    agent->add_option("--grammar", grammar, "Grammar file (default: built in)");
    agent->add_option("--profanity", profanity, "Profanity list (default: built in)");
    agent->add_option("--dances", dances, "Dance list (default: built in)");
    agent->add_flag("--vision-only", vision_only, "Only perceive objects the agent can see");

    auto* play = app.add_subcommand("play", "Run a scripted human client");
    std::string script;
    std::string transcript;
    PlayOptions play_opts;
    play->add_option("script", script, "Script file (default: stdin)");
    play->add_option("--server", server, "HOST:PORT")->capture_default_str();
    play->add_option("--name", play_opts.name, "Player name")->capture_default_str();
    play->add_option("--agent", play_opts.agent_name, "Agent name")->capture_default_str();
    play->add_option("--reply-timeout", play_opts.reply_timeout_ticks, "Ticks to wait for an expected reply")->capture_default_str();
    play->add_option("--transcript", transcript, "Transcript file (default: stdout)");

    auto* replay_cmd = app.add_subcommand("replay", "Replay a session record and print the world hash");
    std::string record_in;
    replay_cmd->add_option("record", record_in, "Session record")->required();
    world_opts.add(replay_cmd);

    auto* gen = app.add_subcommand("gen-data", "Generate (dialogue, action dictionary) pairs");
    std::uint64_t gen_seed = 0;
    std::size_t n = 100;
    std::string out;
    gen->add_option("--grammar", grammar, "Grammar file (default: built in)");
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("-n", n, "Number of pairs")->capture_default_str();
    gen->add_option("--out", out, "Output file (default: stdout)");

    auto* dump = app.add_subcommand("dump-memory", "Print perceived memory as JSON lines");
    std::string segmentation;
    dump->add_option("--record", record_in, "Replay this session record first");
    dump->add_option("--server", server, "Read the world from a live server instead (HOST:PORT)");
    dump->add_option("--name", name, "Player name when connecting")->capture_default_str();
    dump->add_option("--segmentation", segmentation, "Segmentation tags as JSON lines to ingest");
    world_opts.add(dump);

    auto* val = app.add_subcommand("validate", "Check a data file");
    std::string file;
    std::string kind = "parse";
    val->add_option("file", file, "File to check")->required();
    val->add_option("--kind", kind, "parse | house | segmentation | segmentation-nested | grammar | play")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    try {
        if (*serve) return cmd_serve(world_opts, port, host, record, seed, gateway_port, tick_ms);
        if (*agent) return cmd_agent(server, name, grammar, profanity, dances, vision_only);
        if (*play) return cmd_play(script, server, play_opts, transcript);
        if (*replay_cmd) return cmd_replay(world_opts, record_in);
        if (*gen) return cmd_gen_data(grammar, gen_seed, n, out);
        if (*dump) return cmd_dump_memory(world_opts, record_in, dump->count("--server") ? server : std::string{}, name, segmentation);
        if (*val) return cmd_validate(file, kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
