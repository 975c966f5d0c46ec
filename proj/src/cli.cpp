#include "melda/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "melda/flatten.hpp"
#include "melda/harness.hpp"
#include "melda/materialize.hpp"
#include "melda/replica.hpp"

namespace melda::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kMarker = ".melda";

class CommandError : public Error {
public:
    CommandError(int code, const std::string& what) : Error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

/// Exclusive advisory lock on a replica for the lifetime of the object.
class ReplicaLock {
public:
    explicit ReplicaLock(const fs::path& replica) {
        fd_ = ::open((replica / kMarker).c_str(), O_RDWR);
        if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) throw Error("cannot lock replica " + replica.string());
    }
    ReplicaLock(const ReplicaLock&) = delete;
    ReplicaLock& operator=(const ReplicaLock&) = delete;
    ~ReplicaLock() {
        if (fd_ >= 0) ::close(fd_);
    }

private:
    int fd_ = -1;
};

void require_replica(const fs::path& p) {
    if (!fs::is_regular_file(p / kMarker)) throw Error(p.string() + " is not a replica (run 'create' first)");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_create(const fs::path& replica, std::ostream& out) {
    if (fs::exists(replica)) {
        if (!fs::is_directory(replica) || !fs::is_empty(replica))
            throw CommandError(kReplicaExists, replica.string() + " exists and is not empty");
    }
    fs::create_directories(replica);
    std::ofstream(replica / kMarker) << "melda replica\n";
    out << "created " << replica.string() << "\n";
    return kOk;
}

int cmd_update(const fs::path& replica, const fs::path& json_file, std::ostream& out) {
    require_replica(replica);
    Value doc;
    try {
        doc = parse_json(read_file(json_file));
    } catch (const SerializationError& e) {
        throw CommandError(kBadDocument, json_file.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw CommandError(kBadDocument, json_file.string() + ": document root must be an object");

    ReplicaLock lock(replica);
    ReplicaState state = load_pack(replica);
    std::optional<DeltaBlock> block;
    try {
        block = commit(state, doc);
    } catch (const FlattenError& e) {
        throw CommandError(kBadDocument, json_file.string() + ": " + e.what());
    } catch (const SerializationError& e) {
        throw CommandError(kBadDocument, json_file.string() + ": " + e.what());
    }
    if (!block) {
        out << "no changes\n";
        return kOk;
    }
    save_pack(state, replica);
    out << block->id << "\n";
    return kOk;
}

int cmd_read(const fs::path& replica, const std::string& mode, const std::string& output, std::ostream& out) {
    require_replica(replica);
    ReplicaState state = load_pack(replica);
    if (state.empty()) throw CommandError(kEmptyReplica, replica.string() + " holds no document");
    Value doc = unflatten(state, mode == "legacy" ? MaterializeMode::Legacy : MaterializeMode::Updated);
    out << (output == "canonical" ? canonical_serialize(doc) : pretty_serialize(doc)) << "\n";
    return kOk;
}

int cmd_meld(const fs::path& replica, const fs::path& other, bool pull, std::ostream& out) {
    require_replica(replica);
    require_replica(other);
    bool same = fs::equivalent(replica, other);
    // lock in a fixed order so two crossing melds cannot deadlock
    auto first = fs::canonical(replica), second = fs::canonical(other);
    if (second < first) std::swap(first, second);
    ReplicaLock lock_first(first);
    std::optional<ReplicaLock> lock_second;
    if (!same) lock_second.emplace(second);

    ReplicaState mine = load_pack(replica);
    ReplicaState theirs = load_pack(other);
    std::size_t received = 0, sent = 0;
    try {
        ReplicaState merged = mine;
        received = meld_into(merged, theirs);
        if (!pull) {
            ReplicaState back = theirs;
            sent = meld_into(back, mine);
            save_pack(back, other);
        }
        save_pack(merged, replica);
    } catch (const RootMismatchError& e) {
        throw CommandError(kRootMismatch, e.what());
    }
    out << (received + sent) << " new blocks\n";
    return kOk;
}

std::string printable_id(const ObjectId& id) {
    if (!is_anonymous(id)) return id;
    std::string out = "<anonymous";
    for (char c : id.substr(1)) {
        out.push_back(c == '\x1F' || c == '\x1D' ? '/' : c);
    }
    return out + ">";
}

int cmd_log(const fs::path& replica, const std::optional<std::string>& object, std::ostream& out) {
    require_replica(replica);
    ReplicaState state = load_pack(replica);
    if (state.empty()) throw CommandError(kEmptyReplica, replica.string() + " holds no document");
    ObjectId id = object.value_or(*state.root_id());
    const RevisionTree* tree = state.tree(id);
    if (tree == nullptr) throw CommandError(kUnknownObject, "unknown object '" + id + "'");
    RevisionId win = winner(*tree);
    out << "object " << printable_id(id) << "\n";
    for (const auto& e : tree->edges()) {
        out << (e.parent ? e.parent->str() : std::string("(none)")) << " \xE2\x86\x92 " << e.child.str();
        if (tree->is_tombstone(e.child)) out << " [tombstone]";
        if (e.child == win) out << " (winner)";
        out << "\n";
    }
    out << "winner " << win.str() << (is_deleted(*tree) ? " [deleted]" : "") << "\n";
    return kOk;
}

int cmd_scenario(const harness::ScenarioConfig& cfg, std::ostream& out) {
    auto report = harness::run_scenario(cfg, [&](const harness::InvariantEntry& e) {
        out << canonical_serialize(e.to_json()) << "\n";
    });
    out << canonical_serialize(report.summary_json()) << "\n";
    return report.passed() ? kOk : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delta-state JSON CRDT replicas with move support", "melda"};
    app.require_subcommand(1);

    std::string replica, other, json_file, mode = "updated", output = "pretty";
    std::string object;
    bool pull = false;
    harness::ScenarioConfig cfg;
    bool legacy = false;

    auto* create = app.add_subcommand("create", "Initialize an empty replica directory");
    create->add_option("replica", replica, "Replica directory")->required();

    auto* update = app.add_subcommand("update", "Commit a JSON document as the next version");
    update->add_option("replica", replica, "Replica directory")->required();
    update->add_option("document", json_file, "JSON file whose root is an object")->required();

    auto* read = app.add_subcommand("read", "Print the current document");
    read->add_option("replica", replica, "Replica directory")->required();
    read->add_option("--mode", mode, "Materialization mode")->check(CLI::IsMember({"updated", "legacy"}));
    read->add_option("--output", output, "Output format")->check(CLI::IsMember({"pretty", "canonical"}));

    auto* meld = app.add_subcommand("meld", "Exchange delta blocks with another replica");
    meld->add_option("replica", replica, "Replica directory")->required();
    meld->add_option("other", other, "Other replica directory")->required();
    meld->add_flag("--pull", pull, "Only copy blocks into <replica>");

    auto* log = app.add_subcommand("log", "Show the revision tree of an object (default: the root)");
    log->add_option("replica", replica, "Replica directory")->required();
    auto* object_opt = log->add_option("object", object, "Object id");

    auto* scenario = app.add_subcommand("scenario", "Run the multi-client move/convergence simulation");
    scenario->add_option("--clients", cfg.clients, "Number of clients")->check(CLI::Range(2, 1000));
    scenario->add_option("--edits", cfg.edits_per_client, "Edits per client");
    scenario->add_option("--seed", cfg.seed, "RNG seed");
    scenario->add_option("--min-moves", cfg.min_moves, "Fewest objects moved per edit");
    scenario->add_option("--max-moves", cfg.max_moves, "Most objects moved per edit");
    scenario->add_option("--meld-every", cfg.meld_every, "Rounds between random pairwise melds (0: only at the end)");
    scenario->add_flag("--legacy", legacy, "Check invariants on the legacy materialization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*create) return cmd_create(replica, out);
        if (*update) return cmd_update(replica, json_file, out);
        if (*read) return cmd_read(replica, mode, output, out);
        if (*meld) return cmd_meld(replica, other, pull, out);
        if (*log) return cmd_log(replica, *object_opt ? std::optional<std::string>(object) : std::nullopt, out);
        if (*scenario) {
            if (legacy) cfg.mode = MaterializeMode::Legacy;
            return cmd_scenario(cfg, out);
        }
    } catch (const CommandError& e) {
        err << "melda: " << e.what() << "\n";
        return e.code();
    } catch (const RootMismatchError& e) {
        err << "melda: " << e.what() << "\n";
        return kRootMismatch;
    } catch (const EmptyReplicaError& e) {
        err << "melda: " << e.what() << "\n";
        return kEmptyReplica;
    } catch (const std::exception& e) {
        err << "melda: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

}  // namespace melda::cli
