#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "melda/cli.hpp"
#include "melda/value.hpp"

namespace fs = std::filesystem;
using melda::Value;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result melda_run(std::vector<std::string> args) {
    args.insert(args.begin(), "melda");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = melda::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    fs::path root;
    Workspace() {
        static int n = 0;
        root = fs::temp_directory_path() / ("melda-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }

    std::string path(const std::string& name) const { return (root / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(root / name, std::ios::binary) << text;
        return path(name);
    }
};

const char* const kBase = R"({"children♭":[{"_id":"A"},{"_id":"B"},{"_id":"C"}]})";

}  // namespace

TEST_CASE("create makes nested directories and refuses non-empty ones") {
    Workspace w;
    auto r = w.path("a/b/replica");
    CHECK(melda_run({"create", r}).code == 0);
    CHECK(fs::is_directory(r));
    auto again = melda_run({"create", r});
    CHECK(again.code == melda::cli::kReplicaExists);
    CHECK_FALSE(again.err.empty());
}

TEST_CASE("update, read and the no-change path") {
    Workspace w;
    auto r = w.path("r");
    melda_run({"create", r});
    auto doc = w.write("doc.json", kBase);

    auto first = melda_run({"update", r, doc});
    CHECK(first.code == 0);
    CHECK(first.out.size() == 65);
    CHECK(melda_run({"update", r, doc}).out == "no changes\n");

    auto read = melda_run({"read", r, "--output", "canonical"});
    CHECK(read.code == 0);
    CHECK(read.out == melda::canonical_serialize(Value::parse(kBase)) + "\n");
    CHECK(melda_run({"read", r, "--output", "canonical"}).out == read.out);

    auto pretty = melda_run({"read", r});
    CHECK(Value::parse(pretty.out) == Value::parse(kBase));
    CHECK(pretty.out.find("    ") != std::string::npos);
}

TEST_CASE("bad documents exit with the document error code") {
    Workspace w;
    auto r = w.path("r");
    melda_run({"create", r});
    CHECK(melda_run({"update", r, w.write("arr.json", "[1,2]")}).code == melda::cli::kBadDocument);
    CHECK(melda_run({"update", r, w.write("broken.json", "{\"a\":")}).code == melda::cli::kBadDocument);
    CHECK(melda_run({"update", r, w.write("dup.json", R"({"x♭":[{"_id":"A"},{"_id":"A"}]})")}).code ==
          melda::cli::kBadDocument);
    CHECK(melda_run({"update", r, w.path("missing.json")}).code == melda::cli::kFailure);
}

TEST_CASE("reading an empty replica and unknown objects") {
    Workspace w;
    auto r = w.path("r");
    melda_run({"create", r});
    CHECK(melda_run({"read", r}).code == melda::cli::kEmptyReplica);
    CHECK(melda_run({"log", r}).code == melda::cli::kEmptyReplica);
    melda_run({"update", r, w.write("doc.json", kBase)});
    CHECK(melda_run({"log", r, "nobody"}).code == melda::cli::kUnknownObject);
    CHECK(melda_run({"read", w.path("not-a-replica")}).code == melda::cli::kFailure);
}

TEST_CASE("meld between replicas of different documents fails") {
    Workspace w;
    auto a = w.path("a"), b = w.path("b");
    melda_run({"create", a});
    melda_run({"create", b});
    melda_run({"update", a, w.write("one.json", kBase)});
    melda_run({"update", b, w.write("two.json", R"({"_id":"other","x":1})")});
    CHECK(melda_run({"meld", a, b}).code == melda::cli::kRootMismatch);
}

TEST_CASE("two replicas diverge and meld to the same document") {
    Workspace w;
    auto a = w.path("a"), b = w.path("b");
    melda_run({"create", a});
    melda_run({"create", b});
    melda_run({"update", a, w.write("base.json", R"({"children♭":[{"_id":"A","children♭":[{"_id":"C"}]},{"_id":"B"}]})")});
    CHECK(melda_run({"meld", b, a, "--pull"}).out == "1 new blocks\n");

    melda_run({"update", a, w.write("a.json", R"({"children♭":[{"_id":"A","children♭":[{"_id":"B"},{"_id":"C"}]}]})")});
    melda_run({"update", b, w.write("b.json", R"({"children♭":[{"_id":"B","children♭":[{"_id":"A","children♭":[{"_id":"C"}]}]}]})")});

    CHECK(melda_run({"meld", a, b}).out == "2 new blocks\n");
    CHECK(melda_run({"meld", a, b}).out == "0 new blocks\n");
    CHECK(melda_run({"meld", a, a}).out == "0 new blocks\n");

    auto ra = melda_run({"read", a, "--output", "canonical"});
    auto rb = melda_run({"read", b, "--output", "canonical"});
    CHECK(ra.code == 0);
    CHECK(ra.out == rb.out);
    for (const char* id : {"\"A\"", "\"B\"", "\"C\""}) {
        auto first = ra.out.find(id);
        REQUIRE(first != std::string::npos);
        CHECK(ra.out.find(id, first + 1) == std::string::npos);
    }

    auto legacy = melda_run({"read", a, "--mode", "legacy", "--output", "canonical"});
    CHECK(legacy.code == 0);
    CHECK(legacy.out != ra.out);

    auto log = melda_run({"log", a});
    CHECK(log.code == 0);
    CHECK(log.out.find("(none) \xE2\x86\x92 1-") != std::string::npos);
    CHECK(log.out.find("(winner)") != std::string::npos);
    CHECK(log.out.find("winner ") != std::string::npos);
}

TEST_CASE("log marks tombstones") {
    Workspace w;
    auto r = w.path("r");
    melda_run({"create", r});
    melda_run({"update", r, w.write("one.json", kBase)});
    melda_run({"update", r, w.write("two.json", R"({"children♭":[{"_id":"B"},{"_id":"C"}]})")});
    auto log = melda_run({"log", r, "A"});
    CHECK(log.code == 0);
    CHECK(log.out.find("[tombstone] (winner)") != std::string::npos);
    CHECK(log.out.find("[deleted]") != std::string::npos);
}

TEST_CASE("scenario prints one line per check and a summary") {
    auto r = melda_run({"scenario", "--clients", "2", "--edits", "2", "--seed", "3"});
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::string line, last;
    int n = 0;
    while (std::getline(lines, line)) {
        CHECK_NOTHROW((void)Value::parse(line));
        last = line;
        ++n;
    }
    CHECK(n > 2);
    CHECK(Value::parse(last).at("converged") == true);
}

TEST_CASE("usage errors are reported") {
    CHECK(melda_run({}).code != 0);
    CHECK(melda_run({"read"}).code != 0);
    CHECK(melda_run({"frobnicate"}).code != 0);
}

#ifdef MELDA_CLI_PATH
TEST_CASE("the installed binary runs end to end") {
    Workspace w;
    auto r = w.path("r");
    auto doc = w.write("doc.json", kBase);
    std::string cmd = std::string("\"") + MELDA_CLI_PATH + "\" create \"" + r + "\" >/dev/null && \"" + MELDA_CLI_PATH +
                      "\" update \"" + r + "\" \"" + doc + "\" >/dev/null && \"" + MELDA_CLI_PATH + "\" read \"" + r +
                      "\" --output canonical";
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[256];
    while (auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    CHECK(::pclose(p) == 0);
    CHECK(out == melda::canonical_serialize(Value::parse(kBase)) + "\n");

    std::string bad = std::string("\"") + MELDA_CLI_PATH + "\" read \"" + w.path("nothing") + "\" 2>/dev/null";
    int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 1);
}
#endif
