#include "voxelbot/dialogue.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "voxelbot/defaults.hpp"

namespace voxelbot {

// ---------------------------------------------------------------------------------------------
// Profanity

ProfanityFilter ProfanityFilter::parse(std::istream& in) {
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (auto& t : tokenize(line)) words.insert(std::move(t));
    }
    return ProfanityFilter(std::move(words));
}

ProfanityFilter ProfanityFilter::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profanity list: " + path);
    return parse(in);
}

const ProfanityFilter& ProfanityFilter::builtin() {
    static const ProfanityFilter f = [] {
        std::istringstream in(std::string(defaults::profanity_text()));
        return parse(in);
    }();
    return f;
}

bool ProfanityFilter::is_profane(const std::string& text) const {
    const auto toks = tokenize(text);
    return std::any_of(toks.begin(), toks.end(), [&](const std::string& t) { return words_.count(t) != 0; });
}

// ---------------------------------------------------------------------------------------------
// Helpers

std::string normalize_noun(const std::string& word) {
    std::string w = word;
    if (w.size() > 4 && w.compare(w.size() - 3, 3, "ies") == 0) return w.substr(0, w.size() - 3) + "y";
    if (w.size() > 3 && w.compare(w.size() - 2, 2, "es") == 0) {
        const std::string stem = w.substr(0, w.size() - 2);
        const auto ends = [&](const char* suffix) { return stem.size() >= 2 && stem.compare(stem.size() - 2, 2, suffix) == 0; };
        if (stem.back() == 'x' || stem.back() == 'z' || ends("ss") || ends("ch") || ends("sh")) {
            return stem;
        }
    }
    if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
    return w;
}

int size_word_extent(const std::string& word) {
    if (word == "tiny") return 2;
    if (word == "small") return 3;
    if (word == "medium") return 6;
    if (word == "big" || word == "large") return 11;
    if (word == "huge") return 15;
    return 3;
}

namespace {

std::optional<std::string> span_at(const nlohmann::json& obj, const char* key, const Utterance& chat) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto s = Span::from_json(obj[key]);
    if (!s) return std::nullopt;
    try {
        return span_text(*s, chat.tokens);
    } catch (const std::out_of_range&) {
        return std::nullopt;
    }
}

std::optional<int> number_at(const nlohmann::json& obj, const char* key, const Utterance& chat) {
    const auto t = span_at(obj, key, chat);
    if (!t) return std::nullopt;
    try {
        std::size_t used = 0;
        const int v = std::stoi(*t, &used);
        if (used != t->size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string coord_text(const Location& l) {
    return "(" + std::to_string(l.x) + ", " + std::to_string(l.y) + ", " + std::to_string(l.z) + ")";
}

double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

// Object voxel nearest the centroid, ties to the first in (y, z, x) order.
Location representative(const Referent& r) {
    Location best = r.positions.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : r.positions) {
        const double d = dist2(voxel_center(p), Vec3{r.center.x + 0.5, r.center.y + 0.5, r.center.z + 0.5});
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    }
    return best;
}

// Unit step along the dominant horizontal axis of a look.
Location facing_axis(const Look& look) {
    const Vec3 d = look_direction(Look{look.yaw, 0.0});
    if (std::abs(d.x) >= std::abs(d.z)) return {d.x >= 0 ? 1 : -1, 0, 0};
    return {0, 0, d.z >= 0 ? 1 : -1};
}

// First air voxel above the highest solid in the column at or below y.
Location ground_at(const VoxelWorld& world, Location l) {
    if (!world.contains(Location{l.x, 0, l.z})) return l;
    const std::int32_t start = std::clamp(l.y, 0, world.bounds().size_y - 1);
    if (const auto top = world.top_solid_at_or_below(l.x, l.z, start)) l.y = *top + 1;
    return l;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += i + 1 == names.size() ? " and " : ", ";
        out += names[i];
    }
    return out;
}

std::string article(const std::string& noun) {
    if (noun.empty()) return noun;
    const char c = noun.front();
    const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
    return (vowel ? "an " : "a ") + noun;
}

// "brown shed", "house", "thing"
std::string phrase_for(const nlohmann::json& ref, const Utterance& chat) {
    std::string out;
    for (const char* key : {"has_size", "has_colour"}) {
        if (auto t = span_at(ref, key, chat)) out += *t + " ";
    }
    if (auto n = span_at(ref, "has_name", chat)) {
        out += *n;
    } else {
        out += "thing";
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Dialogue objects

void Say::step(DialogueManager& m) {
    m.say(text_);
    finish();
}

void AwaitResponse::step(DialogueManager&) {
    if (slot_->has_value()) {
        finish();
    } else {
        set_blocked(true);
    }
}

bool AwaitResponse::receive(DialogueManager&, const Utterance& u) {
    if (finished()) return false;
    *slot_ = u;
    set_blocked(false);
    return true;
}

ConfirmReferenceObject::ConfirmReferenceObject(std::string question, std::vector<std::string> options,
                                               std::shared_ptr<Clarification> result)
    : DialogueObject("ConfirmReferenceObject"),
      question_(std::move(question)),
      options_(std::move(options)),
      result_(std::move(result)),
      reply_(std::make_shared<std::optional<Utterance>>()) {
    if (options_.size() > 3) options_.resize(3);
}

std::optional<std::size_t> ConfirmReferenceObject::read_choice(const Tokens& reply, std::size_t n_options, bool& cancel) {
    cancel = false;
    static const std::map<std::string, std::size_t> ordinals = {
        {"1", 0},     {"2", 1},      {"3", 2},     {"one", 0},    {"two", 1},  {"three", 2}, {"first", 0},
        {"second", 1}, {"third", 2}, {"1st", 0},   {"2nd", 1},    {"3rd", 2},
    };
    static const std::set<std::string> negatives = {"no", "nope", "cancel", "none", "neither", "nevermind", "nothing"};
    static const std::set<std::string> affirmatives = {"yes", "yeah", "yep", "sure", "ok", "okay"};
    static const std::set<std::string> filler = {"the", "one", "number", "option", "please", ".", "!", ",", "that"};

    std::vector<std::string> words;
    for (const auto& t : reply) {
        if (t != "." && t != "!" && t != ",") words.push_back(t);
    }
    if (words.empty()) return std::nullopt;
    if (std::any_of(words.begin(), words.end(), [](const std::string& w) { return negatives.count(w) != 0; }) ||
        (words.size() == 2 && words[0] == "never" && words[1] == "mind")) {
        cancel = true;
        return std::nullopt;
    }
    std::optional<std::size_t> pick;
    bool other = false;
    for (const auto& w : words) {
        if (affirmatives.count(w) && !pick) {
            pick = 0;
        } else if (auto it = ordinals.find(w); it != ordinals.end() && w != "one") {
            pick = it->second;
        } else if (w == "one" && words.size() == 1) {
            pick = 0;
        } else if (!filler.count(w)) {
            other = true;
        }
    }
    if (other || !pick || *pick >= n_options) return std::nullopt;
    return pick;
}

void ConfirmReferenceObject::step(DialogueManager& m) {
    if (stage_ == 0) {
        std::string q = question_;
        for (std::size_t i = 0; i < options_.size(); ++i) q += " " + std::to_string(i + 1) + ") " + options_[i];
        q += options_.size() == 1 ? " Reply yes or no." : " Reply with a number, or no to cancel.";
        m.push(std::make_unique<Say>(q));
        stage_ = 1;
        return;
    }
    if (stage_ == 1) {
        m.push(std::make_unique<AwaitResponse>(reply_));
        stage_ = 2;
        return;
    }
    result_->done = true;
    bool cancel = false;
    const Tokens words = reply_->has_value() && !(*reply_)->tokens.empty() ? (*reply_)->tokens.back() : Tokens{};
    result_->choice = read_choice(words, options_.size(), cancel);
    if (!result_->choice) {
        result_->cancelled = true;
        if (cancel) {
            m.say("OK, never mind.");
        } else {
            m.request_reparse();
        }
    }
    finish();
}

// ---------------------------------------------------------------------------------------------
// Interpreter

void Interpreter::step(DialogueManager& m) {
    auto& env = m.env();
    TaskContext& ctx = *env.task_ctx;
    const nlohmann::json& action = dict_["action"];
    const std::string type = action.value("action_type", "");

    auto push_task = [&](std::unique_ptr<Task> t) { env.tasks->push(std::move(t), ctx); };

    auto build_at = [&](const std::string& name, const Location& origin) {
        ShapeParams params;
        const auto& sch = action.contains("schematic") ? action["schematic"] : nlohmann::json::object();
        if (auto s = span_at(sch, "has_size", chat_)) params.size = size_word_extent(*s);
        if (auto w = number_at(sch, "has_width", chat_)) params.width = *w;
        if (auto h = number_at(sch, "has_height", chat_)) params.height = *h;
        if (auto c = span_at(sch, "has_colour", chat_)) {
            if (auto b = env.registry->block_for_colour(*c)) params.material = *b;
        }
        auto schematic = env.schematics->make(name, params);
        if (!schematic || schematic->empty()) {
            m.say("I can't build a " + name + " like that.");
            return;
        }
        push_task(std::make_unique<BuildTask>(std::move(*schematic), origin, name));
        m.say("Building a " + name + ".");
    };

    auto speaker = m.speaker_record(chat_.speaker);
    const Location speaker_voxel = speaker ? to_voxel(speaker->position) : ctx.agent;
    const Look speaker_look = speaker ? speaker->look : ctx.look;
    const Location in_front = ground_at(*env.world, speaker_voxel + Location{facing_axis(speaker_look).x * 3, 0,
                                                                               facing_axis(speaker_look).z * 3});

    // Build origin or dig/spawn target, defaulting to a spot in front of the speaker.
    auto target_location = [&](std::string& error, bool prefer_in_front) -> std::optional<Location> {
        if (!action.contains("location")) return prefer_in_front ? in_front : speaker_voxel;
        const auto& loc = action["location"];
        const std::string lt = loc.value("location_type", "");
        if (lt == "SPEAKER_POS" && prefer_in_front) return in_front;
        if (lt == "REFERENCE_OBJECT" && prefer_in_front && !loc.contains("relative_direction")) {
            const auto refs = m.resolve_reference(loc["reference_object"], chat_);
            if (refs.empty()) {
                error = "I can't find the " + phrase_for(loc["reference_object"], chat_) + ".";
                return std::nullopt;
            }
            std::int32_t max_x = refs.front().positions.front().x;
            std::int32_t min_y = refs.front().positions.front().y;
            std::int32_t min_z = refs.front().positions.front().z;
            for (const auto& p : refs.front().positions) {
                max_x = std::max(max_x, p.x);
                min_y = std::min(min_y, p.y);
                min_z = std::min(min_z, p.z);
            }
            return Location{max_x + 2, min_y, min_z};
        }
        return m.resolve_location(loc, chat_, error);
    };

    if (pending_) {
        if (pending_->cancelled || !pending_->choice) {
            finish();
            return;
        }
        const std::size_t choice = *pending_->choice;
        if (!options_.empty() && choice < options_.size()) {
            const Referent& r = options_[choice];
            push_task(std::make_unique<DestroyTask>(r.positions, r.id));
            m.say("Destroying " + m.describe(r) + ".");
        } else if (!schematic_options_.empty() && choice < schematic_options_.size()) {
            std::string error;
            if (auto origin = target_location(error, true)) {
                build_at(schematic_options_[choice], *origin);
            } else {
                m.say(error);
            }
        }
        finish();
        return;
    }

    std::string error;
    if (type == "MOVE") {
        if (auto target = m.resolve_location(action.value("location", nlohmann::json::object()), chat_, error)) {
            push_task(std::make_unique<MoveTask>(*target));
            m.say("Moving to " + coord_text(*target) + ".");
        } else {
            m.say(error.empty() ? "I don't know where that is." : error);
        }
    } else if (type == "BUILD") {
        const auto& sch = action.value("schematic", nlohmann::json::object());
        const std::string name = normalize_noun(span_at(sch, "has_name", chat_).value_or(""));
        if (name.empty() || !env.schematics->knows(name)) {
            auto names = env.schematics->names();
            if (names.size() > 3) names.resize(3);
            schematic_options_ = names;
            pending_ = std::make_shared<Clarification>();
            m.push(std::make_unique<ConfirmReferenceObject>(
                "I don't know how to build " + (name.empty() ? std::string("that") : article(name)) + ". Did you mean:",
                names, pending_));
            return;
        }
        if (auto origin = target_location(error, true)) {
            build_at(name, *origin);
        } else {
            m.say(error);
        }
    } else if (type == "DESTROY") {
        const auto& ref = action.value("reference_object", nlohmann::json::object());
        auto refs = m.resolve_reference(ref, chat_);
        if (refs.empty()) {
            m.say("I can't find the " + phrase_for(ref, chat_) + ".");
        } else if (refs.size() == 1) {
            push_task(std::make_unique<DestroyTask>(refs.front().positions, refs.front().id));
            m.say("Destroying " + m.describe(refs.front()) + ".");
        } else {
            if (refs.size() > 3) refs.resize(3);
            options_ = refs;
            std::vector<std::string> descs;
            for (const auto& r : options_) descs.push_back(m.describe(r));
            pending_ = std::make_shared<Clarification>();
            m.push(std::make_unique<ConfirmReferenceObject>("Which one do you mean?", descs, pending_));
            return;
        }
    } else if (type == "DIG") {
        if (auto at = target_location(error, true)) {
            const auto& sch = action.value("schematic", nlohmann::json::object());
            int w = 1;
            int l = 1;
            int d = 1;
            if (auto s = span_at(sch, "has_size", chat_)) w = l = d = size_word_extent(*s);
            else w = l = d = size_word_extent("small");
            if (auto v = number_at(sch, "has_width", chat_)) w = *v;
            if (auto v = number_at(sch, "has_length", chat_)) l = *v;
            if (auto v = number_at(sch, "has_depth", chat_)) d = *v;
            if (w < 1 || l < 1 || d < 1) {
                m.say("I can't dig a hole that size.");
            } else {
                // Dig centred on the target column, top layer just below it.
                const Location corner{at->x - (w - 1) / 2, at->y, at->z - (l - 1) / 2};
                push_task(std::make_unique<DigTask>(corner, w, l, d));
                m.say("Digging.");
            }
        } else {
            m.say(error);
        }
    } else if (type == "FILL") {
        if (auto at = target_location(error, false)) {
            push_task(std::make_unique<FillTask>(*at));
            m.say("Filling the hole.");
        } else {
            m.say(error);
        }
    } else if (type == "SPAWN") {
        const auto& ref = action.value("reference_object", nlohmann::json::object());
        const auto kind_word = span_at(ref, "has_name", chat_);
        const auto kind = kind_word ? mob_kind_from_string(normalize_noun(*kind_word)) : std::nullopt;
        if (!kind) {
            m.say("I don't know how to spawn that.");
        } else if (auto at = target_location(error, true)) {
            push_task(std::make_unique<SpawnTask>(*kind, *at));
            m.say(std::string("Spawning ") + article(to_string(*kind)) + ".");
        } else {
            m.say(error);
        }
    } else if (type == "DANCE" || type == "LOOP") {
        const nlohmann::json& body = type == "LOOP" ? action["repeat"] : action;
        const std::string body_type = body.value("action_type", "");
        if (type == "DANCE" || body_type == "DANCE") {
            std::string name = env.dances->default_name();
            if (auto n = span_at(body.value("dance_type", nlohmann::json::object()), "dance_type_name", chat_)) name = *n;
            const auto* moves = env.dances->find(name);
            if (!moves) {
                m.say("I don't know the " + name + " dance.");
                finish();
                return;
            }
            if (type == "DANCE") {
                push_task(std::make_unique<DanceTask>(name, *moves));
                m.say("Dancing.");
            } else {
                const auto seq = *moves;
                push_task(std::make_unique<LoopTask>(
                    StopCondition::never(), ctx.agent,
                    [name, seq](const StopCondition&, const LoopAnchor&) { return std::make_unique<DanceTask>(name, seq); }));
                m.say("Dancing until you tell me to stop.");
            }
        } else if (body_type == "DIG") {
            const auto& cond = action["stop_condition"];
            const std::string ct = cond.value("condition_type", "NEVER");
            StopCondition c = StopCondition::never();
            if (ct == "ADJACENT_TO_BLOCK_TYPE") {
                const auto word = span_at(cond, "block_type", chat_);
                const auto block = word ? env.registry->find_by_name(*word) : std::nullopt;
                if (!block) {
                    m.say("I don't know the block " + (word ? "'" + *word + "'" : std::string("type")) + ".");
                    finish();
                    return;
                }
                c = StopCondition::block_hit(*block);
            } else if (ct == "DEPTH_REACHED") {
                const auto n = number_at(cond, "depth", chat_);
                if (!n || *n < 1) {
                    m.say("I don't know how deep to dig.");
                    finish();
                    return;
                }
                c = StopCondition::depth_reached(*n);
            }
            std::string err;
            Location anchor = ctx.agent;
            if (body.contains("location")) {
                if (auto a = m.resolve_location(body["location"], chat_, err)) anchor = *a;
            }
            push_task(std::make_unique<LoopTask>(c, anchor, [](const StopCondition& cond2, const LoopAnchor& a) {
                auto dig = std::make_unique<DigTask>(a.anchor, 1, 1, 1);
                dig->halt_when(cond2, a);
                return dig;
            }));
            m.say("Digging down.");
        } else {
            m.say("I can't repeat that.");
        }
    } else if (type == "UNDO") {
        if (!env.memory->last_undoable_task()) {
            m.say("There is nothing to undo.");
        } else {
            push_task(std::make_unique<UndoTask>());
            m.say("Undoing the last thing I did.");
        }
    } else if (type == "STOP") {
        const std::size_t n = env.tasks->stop(ctx);
        if (env.on_stop) env.on_stop(n);
        m.say(n ? "Stopping." : "I'm not doing anything right now.");
    } else if (type == "RESUME") {
        const std::size_t n = env.tasks->resume(ctx);
        m.say(n ? "Resuming." : "There is nothing to resume.");
    } else {
        m.say("Sorry, I can't do that.");
    }
    finish();
}

// ---------------------------------------------------------------------------------------------
// Memory handlers

void GetMemoryHandler::step(DialogueManager& m) {
    const auto& ref = dict_["filters"]["reference_object"];
    const std::string answer = dict_.value("answer_type", "");
    const auto refs = m.resolve_reference(ref, chat_);
    const std::string what = phrase_for(ref, chat_);
    if (answer == "COUNT") {
        const std::size_t n = refs.size();
        m.say(n == 1 ? "There is 1." : "There are " + std::to_string(n) + ".");
    } else if (refs.empty()) {
        m.say(answer == "LOCATION" ? "I don't know where the " + what + " is." : "I don't know what that is.");
    } else if (answer == "LOCATION") {
        m.say("The " + what + " is at " + coord_text(representative(refs.front())) + ".");
    } else {
        const auto& mem = *m.env().memory;
        std::vector<std::string> names;
        for (const char* pred : {"has_tag", "has_name"}) {
            for (const auto& v : mem.literal_values(refs.front().id, pred)) {
                if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
            }
        }
        if (names.empty()) {
            m.say("I don't know what that is.");
        } else {
            std::vector<std::string> with_article;
            for (const auto& n : names) with_article.push_back(article(n));
            m.say("That is " + join_names(with_article) + ".");
        }
    }
    finish();
}

void PutMemoryHandler::step(DialogueManager& m) {
    auto& mem = *m.env().memory;
    const auto tag = span_at(dict_["upsert"], "has_tag", chat_);
    if (!tag) {
        m.say("I didn't catch the name.");
        finish();
        return;
    }
    auto tag_one = [&](const Referent& r) {
        const std::string before = m.describe(r);
        mem.insert_triple(r.id, "has_tag", *tag);
        m.say("OK, " + before + " is " + article(*tag) + ".");
    };
    if (pending_) {
        if (!pending_->cancelled && pending_->choice && *pending_->choice < options_.size()) tag_one(options_[*pending_->choice]);
        finish();
        return;
    }
    const auto& ref = dict_["filters"]["reference_object"];
    auto refs = m.resolve_reference(ref, chat_);
    if (refs.empty()) {
        m.say("I don't see " + article(phrase_for(ref, chat_)) + ". Which object do you mean?");
    } else if (refs.size() == 1 || ref.empty()) {
        tag_one(refs.front());
    } else {
        if (refs.size() > 3) refs.resize(3);
        options_ = refs;
        std::vector<std::string> descs;
        for (const auto& r : options_) descs.push_back(m.describe(r));
        pending_ = std::make_shared<Clarification>();
        m.push(std::make_unique<ConfirmReferenceObject>("Which one do you mean?", descs, pending_));
        return;
    }
    finish();
}

// ---------------------------------------------------------------------------------------------
// Manager

DialogueManager::DialogueManager(DialogueEnv env, const Parser& parser, ProfanityFilter profanity)
    : env_(std::move(env)), parser_(parser), profanity_(std::move(profanity)) {}

void DialogueManager::say(const std::string& text) {
    if (env_.say) env_.say(text);
}

void DialogueManager::push(std::unique_ptr<DialogueObject> obj) { stack_.push_back(std::move(obj)); }

std::vector<const DialogueObject*> DialogueManager::stack() const {
    std::vector<const DialogueObject*> out;
    for (const auto& o : stack_) out.push_back(o.get());
    return out;
}

const PlayerRecord* DialogueManager::speaker_record(const std::string& name) const {
    return env_.world ? env_.world->find_player(name) : nullptr;
}

void DialogueManager::handle_chat(const std::string& speaker, const std::string& text) {
    if (profanity_.is_profane(text)) {
        say("Please don't talk like that.");
        return;
    }
    const std::uint64_t step = env_.task_ctx ? env_.task_ctx->step : 0;
    env_.memory->record_chat(speaker, text, step);
    Utterance u{speaker, text, {tokenize(text)}};

    if (!stack_.empty()) {
        if (stack_.back()->receive(*this, u)) {
            run();
            if (!reparse_) return;
            reparse_ = false;
            // The abandoned clarification unwinds before the reply is treated as a new command.
            while (!stack_.empty() && stack_.back()->finished()) stack_.pop_back();
        } else {
            stack_.clear();
        }
    }
    ++parse_calls_;
    route(parser_.parse_tokens(u.tokens), u);
    run();
}

void DialogueManager::route(const ActionDict& dict, const Utterance& u) {
    const std::string type = dict.value("dialogue_type", "NOOP");
    if (type == "HUMAN_GIVE_COMMAND") {
        push(std::make_unique<Interpreter>(dict, u));
    } else if (type == "GET_MEMORY") {
        push(std::make_unique<GetMemoryHandler>(dict, u));
    } else if (type == "PUT_MEMORY") {
        push(std::make_unique<PutMemoryHandler>(dict, u));
    } else {
        say("Sorry, I didn't understand.");
    }
}

void DialogueManager::run() {
    while (!stack_.empty()) {
        DialogueObject& top = *stack_.back();
        if (top.finished()) {
            stack_.pop_back();
            if (!stack_.empty()) stack_.back()->blocked_ = false;
            continue;
        }
        if (top.blocked()) break;
        const std::size_t before = stack_.size();
        top.step(*this);
        if (stack_.size() > before) {
            top.blocked_ = true;
            continue;
        }
        if (!top.finished() && !top.blocked()) break;
    }
}

namespace {

Referent referent_for(const MemoryObject& o) {
    Referent r{o.id, {}, {}};
    if (const auto* b = o.block_object()) {
        r.positions = b->positions;
        r.center = centroid(r.positions);
    } else if (const auto* mob = o.mob()) {
        r.positions = {to_voxel(mob->position)};
        r.center = centroid(r.positions);
    }
    return r;
}

bool has_normalized(const MemoryStore& mem, MemoryId id, const std::string& word) {
    for (const char* pred : {"has_tag", "has_name"}) {
        for (const auto& v : mem.literal_values(id, pred)) {
            if (normalize_noun(v) == word) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Referent> DialogueManager::resolve_reference(const nlohmann::json& ref, const Utterance& chat) const {
    const MemoryStore& mem = *env_.memory;
    std::vector<Referent> cands;
    for (const auto* o : mem.query({}, MemoryKind::block_object)) cands.push_back(referent_for(*o));
    for (const auto* o : mem.query({}, MemoryKind::mob)) cands.push_back(referent_for(*o));
    cands.erase(std::remove_if(cands.begin(), cands.end(), [](const Referent& r) { return r.positions.empty(); }), cands.end());

    const PlayerRecord* speaker = speaker_record(chat.speaker);
    const Look look = speaker ? speaker->look : (env_.task_ctx ? env_.task_ctx->look : Look{});
    const Vec3 origin = speaker ? speaker->position
                                : (env_.task_ctx ? voxel_center(env_.task_ctx->agent) : Vec3{});

    auto sort_by_distance = [&](std::vector<Referent>& v) {
        std::stable_sort(v.begin(), v.end(), [&](const Referent& a, const Referent& b) {
            const double da = dist2(a.center, origin);
            const double db = dist2(b.center, origin);
            if (da != db) return da < db;
            return a.id < b.id;
        });
    };

    if (!ref.is_object() || ref.empty()) {
        // "that": the object under the speaker's line of sight, else the nearest one.
        if (speaker && env_.world) {
            const Vec3 eye{speaker->position.x, speaker->position.y + 1.6, speaker->position.z};
            const auto hit = cast_ray(*env_.world, eye, look_direction(look), 64.0);
            if (hit.hit) {
                for (const auto& c : cands) {
                    if (std::binary_search(c.positions.begin(), c.positions.end(), hit.voxel, YzxLess{})) return {c};
                }
            }
        }
        sort_by_distance(cands);
        if (cands.size() > 1) cands.resize(1);
        return cands;
    }

    if (auto name = span_at(ref, "has_name", chat)) {
        const std::string word = normalize_noun(*name);
        std::erase_if(cands, [&](const Referent& r) { return !has_normalized(mem, r.id, word); });
    }
    if (auto colour = span_at(ref, "has_colour", chat)) {
        std::erase_if(cands, [&](const Referent& r) {
            const auto vals = mem.literal_values(r.id, "has_colour");
            return std::find(vals.begin(), vals.end(), *colour) == vals.end();
        });
    }
    if (auto size = span_at(ref, "has_size", chat)) {
        const SizeLexicon lex = env_.sizes ? *env_.sizes : SizeLexicon{};
        if (lex.knows(*size)) {
            std::erase_if(cands, [&](const Referent& r) { return !match_size(*size, r.positions, lex); });
        }
    }
    if (ref.contains("location") && ref["location"].is_object()) {
        const auto& loc = ref["location"];
        const auto dir = relative_direction_from_string(loc.value("relative_direction", ""));
        if (dir && loc.contains("reference_object")) {
            const auto anchors = resolve_reference(loc["reference_object"], chat);
            if (anchors.empty()) return {};
            const Referent& anchor = anchors.front();
            std::erase_if(cands, [&](const Referent& r) {
                return r.id == anchor.id || !in_direction(anchor.center, r.center, *dir, look);
            });
        }
    }
    sort_by_distance(cands);
    return cands;
}

std::optional<Location> DialogueManager::resolve_location(const nlohmann::json& loc, const Utterance& chat,
                                                          std::string& error) const {
    const std::string type = loc.is_object() ? loc.value("location_type", "SPEAKER_POS") : "SPEAKER_POS";
    const PlayerRecord* speaker = speaker_record(chat.speaker);
    const Location agent = env_.task_ctx ? env_.task_ctx->agent : Location{};
    if (type == "AGENT_POS") return agent;
    if (type == "SPEAKER_POS") {
        if (!speaker) {
            error = "I can't see you.";
            return std::nullopt;
        }
        return to_voxel(speaker->position);
    }
    if (type == "COORDINATES") {
        const auto text = span_at(loc, "coordinates", chat);
        if (!text) {
            error = "I didn't understand those coordinates.";
            return std::nullopt;
        }
        std::istringstream in(*text);
        Location l;
        if (!(in >> l.x >> l.y >> l.z)) {
            error = "I didn't understand those coordinates.";
            return std::nullopt;
        }
        return l;
    }
    if (type == "REFERENCE_OBJECT") {
        const auto& ref = loc.value("reference_object", nlohmann::json::object());
        const auto refs = resolve_reference(ref, chat);
        if (refs.empty()) {
            error = "I can't find the " + phrase_for(ref, chat) + ".";
            return std::nullopt;
        }
        const Referent& r = refs.front();
        Location target = representative(r);
        if (const auto dir = relative_direction_from_string(loc.value("relative_direction", ""))) {
            // Step just past the object's extent in the requested direction.
            const Look look = speaker ? speaker->look : Look{};
            const Location f = facing_axis(look);
            const Location left{-f.z, 0, f.x};
            int reach = 0;
            for (const auto& p : r.positions) reach = std::max(reach, chebyshev(p, target));
            const int k = reach + 2;
            switch (*dir) {
                case RelativeDirection::left: target = target + Location{left.x * k, 0, left.z * k}; break;
                case RelativeDirection::right: target = target - Location{left.x * k, 0, left.z * k}; break;
                case RelativeDirection::front: target = target - Location{f.x * k, 0, f.z * k}; break;
                case RelativeDirection::back: target = target + Location{f.x * k, 0, f.z * k}; break;
                case RelativeDirection::above: {
                    std::int32_t top = target.y;
                    for (const auto& p : r.positions) top = std::max(top, p.y);
                    target.y = top + 1;
                    break;
                }
                case RelativeDirection::below: target.y -= 1; break;
            }
            if (env_.world && *dir != RelativeDirection::above && *dir != RelativeDirection::below) {
                target = ground_at(*env_.world, Location{target.x, target.y + 4, target.z});
            }
        }
        return target;
    }
    error = "I don't know where that is.";
    return std::nullopt;
}

std::string DialogueManager::describe(const Referent& r) const {
    const MemoryStore& mem = *env_.memory;
    std::string out = "the ";
    const auto colours = mem.literal_values(r.id, "has_colour");
    if (!colours.empty()) out += colours.front() + " ";
    auto names = mem.literal_values(r.id, "has_tag");
    if (names.empty()) names = mem.literal_values(r.id, "has_name");
    out += names.empty() ? "thing" : names.front();
    return out + " at " + coord_text(representative(r));
}

}  // namespace voxelbot
