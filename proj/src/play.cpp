#include "voxelbot/play.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "voxelbot/gateway.hpp"

namespace voxelbot {

namespace pr = protocol;

namespace {

struct Arity {
    const char* op;
    std::size_t min;
    std::size_t max;
    bool numeric;
};

constexpr Arity kOps[] = {
    {"wait", 1, 1, true},          {"assert_block", 5, 5, true}, {"assert_near", 1, 1, true},
    {"move", 3, 5, true},          {"place", 5, 5, true},        {"break", 3, 3, true},
    {"assert_agent_near", 4, 4, true}, {"assert_hash", 0, 0, false},
};

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

bool is_number(const std::string& s) {
    std::istringstream in(s);
    double v = 0;
    return (in >> v) && in.eof();
}

}  // namespace

std::vector<PlayCommand> parse_play_script(std::istream& in) {
    std::vector<PlayCommand> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream words(line.substr(first));
        PlayCommand cmd;
        cmd.line = n;
        words >> cmd.op;
        std::string rest;
        std::getline(words, rest);
        const auto rs = rest.find_first_not_of(" \t");
        rest = rs == std::string::npos ? std::string{} : rest.substr(rs);
        while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.pop_back();
        if (cmd.op == "say" || cmd.op == "assert_reply_contains") {
            rest = strip_quotes(rest);
            if (rest.empty()) throw ScriptError("line " + std::to_string(n) + ": " + cmd.op + " needs text", n);
            cmd.args.push_back(rest);
            out.push_back(std::move(cmd));
            continue;
        }
        const Arity* a = nullptr;
        for (const auto& k : kOps) {
            if (cmd.op == k.op) a = &k;
        }
        if (!a) throw ScriptError("line " + std::to_string(n) + ": unknown command '" + cmd.op + "'", n);
        std::istringstream args(rest);
        for (std::string w; args >> w;) cmd.args.push_back(w);
        if (cmd.args.size() < a->min || cmd.args.size() > a->max) {
            throw ScriptError("line " + std::to_string(n) + ": " + cmd.op + " takes " + std::to_string(a->min) +
                                  (a->min == a->max ? "" : "-" + std::to_string(a->max)) + " arguments",
                              n);
        }
        for (const auto& w : cmd.args) {
            if (a->numeric && !is_number(w)) throw ScriptError("line " + std::to_string(n) + ": '" + w + "' is not a number", n);
        }
        out.push_back(std::move(cmd));
    }
    return out;
}

namespace {

class Session {
public:
    Session(Transport& t, const PlayOptions& o, PlayResult& r) : t_(t), o_(o), r_(r) {}

    bool login() {
        send(pr::Login{pr::kProtocolVersion, o_.name});
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(o_.login_timeout_ms);
        while (!logged_in_ && !gone_ && std::chrono::steady_clock::now() < deadline) pump(50);
        if (!logged_in_) fail("login", gone_ ? "disconnected: " + reason_ : "no snapshot from server");
        return logged_in_;
    }

    void run(const PlayCommand& c) {
        const auto num = [&](std::size_t i) { return std::stod(c.args[i]); };
        const auto inum = [&](std::size_t i) { return static_cast<std::int32_t>(std::lround(num(i))); };
        const std::string where = "line " + std::to_string(c.line) + " " + c.op;
        if (c.op == "say") {
            replies_.clear();
            send(pr::ChatSend{c.args[0]});
        } else if (c.op == "wait") {
            wait_ticks(static_cast<std::uint64_t>(std::max(0L, std::lround(num(0)))));
            r_.transcript.push_back("# tick " + std::to_string(tick_) + " hash " + hash_hex(world_.hash()));
        } else if (c.op == "move") {
            const Vec3 pos{inum(0) + 0.5, static_cast<double>(inum(1)), inum(2) + 0.5};
            const Look look{c.args.size() > 3 ? num(3) : 0.0, c.args.size() > 4 ? num(4) : 0.0};
            if (auto* me = world_.find_player(o_.name)) {
                me->position = pos;
                me->look = look;
            }
            send(pr::PlayerMove{"", pr::FixedPos::from(pos), pr::FixedLook::from(look)});
        } else if (c.op == "place") {
            send(pr::BlockChange{{inum(0), inum(1), inum(2)},
                                 {static_cast<std::uint8_t>(inum(3)), static_cast<std::uint8_t>(inum(4))},
                                 Provenance::placed_by_player});
        } else if (c.op == "break") {
            send(pr::BlockChange{{inum(0), inum(1), inum(2)}, kAir, Provenance::natural});
        } else if (c.op == "assert_block") {
            pump(0);
            const Location l{inum(0), inum(1), inum(2)};
            const BlockId want{static_cast<std::uint8_t>(inum(3)), static_cast<std::uint8_t>(inum(4))};
            if (!world_.contains(l)) {
                check(where, false, "location out of bounds");
            } else {
                const BlockId got = world_.get_block(l);
                check(where, got == want, "found " + std::to_string(got.id) + ":" + std::to_string(got.meta));
            }
        } else if (c.op == "assert_near" || c.op == "assert_agent_near") {
            pump(0);
            const auto* agent = world_.find_player(o_.agent_name);
            Vec3 target;
            double limit = 0;
            if (c.op == "assert_near") {
                const auto* me = world_.find_player(o_.name);
                target = me ? me->position : Vec3{};
                limit = num(0);
            } else {
                target = {inum(0) + 0.5, static_cast<double>(inum(1)), inum(2) + 0.5};
                limit = num(3);
            }
            if (!agent) {
                check(where, false, "agent '" + o_.agent_name + "' not seen");
            } else {
                const double d = std::sqrt(std::pow(agent->position.x - target.x, 2) + std::pow(agent->position.y - target.y, 2) +
                                           std::pow(agent->position.z - target.z, 2));
                std::ostringstream why;
                why << "agent at distance " << d;
                check(where, d <= limit, why.str());
            }
        } else if (c.op == "assert_reply_contains") {
            if (!wait_ticks(0)) return;
            const std::uint64_t until = tick_ + static_cast<std::uint64_t>(o_.reply_timeout_ticks);
            auto found = [&] {
                for (const auto& r : replies_) {
                    if (r.find(c.args[0]) != std::string::npos) return true;
                }
                return false;
            };
            while (!found() && tick_ < until && !gone_) {
                if (!wait_ticks(1)) break;
            }
            check(where, found(), "no agent reply containing \"" + c.args[0] + "\"");
        } else if (c.op == "assert_hash") {
            pump(0);
            r_.transcript.push_back("# tick " + std::to_string(tick_) + " hash " + hash_hex(world_.hash()));
        }
    }

    [[nodiscard]] bool gone() const { return gone_; }

private:
    void send(const pr::Message& m) {
        if (gone_) return;
        try {
            t_.send(m);
        } catch (const NetError& e) {
            gone_ = true;
            reason_ = e.what();
        }
    }

    void pump(int timeout_ms) {
        for (const auto& m : t_.receive(timeout_ms)) apply(m);
        if (!t_.connected() && !gone_) {
            gone_ = true;
            reason_ = "connection closed";
        }
    }

    bool wait_ticks(std::uint64_t n) {
        auto last = std::chrono::steady_clock::now();
        // The snapshot does not carry the server clock; the first Tick sets the baseline.
        while (!tick_known_ && !gone_) {
            pump(50);
            if (std::chrono::steady_clock::now() - last > std::chrono::milliseconds(o_.tick_timeout_ms)) {
                fail("wait", "server is not ticking");
                return false;
            }
        }
        const std::uint64_t target = tick_ + n;
        while (tick_ < target && !gone_) {
            const std::uint64_t before = tick_;
            pump(50);
            if (tick_ != before) {
                last = std::chrono::steady_clock::now();
            } else if (std::chrono::steady_clock::now() - last > std::chrono::milliseconds(o_.tick_timeout_ms)) {
                fail("wait", "server stopped ticking");
                return false;
            }
        }
        return tick_ >= target;
    }

    void apply(const pr::Message& m) {
        std::visit(
            [&](const auto& msg) {
                using T = std::decay_t<decltype(msg)>;
                if constexpr (std::is_same_v<T, pr::WorldSnapshot>) {
                    world_ = pr::world_from_snapshot(msg);
                    logged_in_ = true;
                } else if constexpr (std::is_same_v<T, pr::BlockChange>) {
                    if (world_.contains(msg.loc)) world_.set_block(msg.loc, msg.block, msg.source, 0);
                } else if constexpr (std::is_same_v<T, pr::PlayerMove>) {
                    PlayerRecord* p = world_.find_player(msg.name);
                    if (!p) {
                        const std::uint32_t id = world_.players.empty() ? 1 : world_.players.rbegin()->first + 1;
                        p = &world_.players[id];
                        p->player_id = id;
                        p->name = msg.name;
                    }
                    p->position = msg.position.to_vec3();
                    p->look = msg.look.to_look();
                } else if constexpr (std::is_same_v<T, pr::ChatBroadcast>) {
                    r_.transcript.push_back(msg.speaker + ": " + msg.text);
                    if (msg.speaker == o_.agent_name) replies_.push_back(msg.text);
                } else if constexpr (std::is_same_v<T, pr::Tick>) {
                    tick_ = std::max<std::uint64_t>(tick_, msg.seq);
                    tick_known_ = true;
                } else if constexpr (std::is_same_v<T, pr::Disconnect>) {
                    gone_ = true;
                    reason_ = msg.reason;
                }
            },
            m);
    }

    void check(const std::string& what, bool ok, const std::string& detail) {
        ++r_.assertions;
        if (ok) {
            r_.transcript.push_back("PASS " + what);
        } else {
            fail(what, detail);
        }
    }

    void fail(const std::string& what, const std::string& detail) {
        ++r_.failures;
        r_.passed = false;
        r_.transcript.push_back("FAIL " + what + ": " + detail);
    }

    Transport& t_;
    const PlayOptions& o_;
    PlayResult& r_;
    VoxelWorld world_{Bounds{1, 1, 1}};
    std::vector<std::string> replies_;
    std::uint64_t tick_ = 0;
    bool tick_known_ = false;
    bool logged_in_ = false;
    bool gone_ = false;
    std::string reason_;
};

}  // namespace

PlayResult run_play_script(Transport& transport, const std::vector<PlayCommand>& script, const PlayOptions& options) {
    PlayResult result;
    if (script.empty()) return result;
    Session s(transport, options, result);
    if (!s.login()) return result;
    for (const auto& c : script) {
        s.run(c);
        if (s.gone()) {
            ++result.failures;
            result.passed = false;
            result.transcript.push_back("FAIL line " + std::to_string(c.line) + ": connection lost");
            break;
        }
    }
    return result;
}

}  // namespace voxelbot
