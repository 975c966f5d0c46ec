#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "melda/replica.hpp"

namespace melda {

namespace fs = std::filesystem;

std::size_t save_pack(const ReplicaState& state, const fs::path& dir) {
    fs::create_directories(dir);
    std::size_t written = 0;
    for (const auto& [id, block] : state.blocks()) {
        fs::path target = dir / (id + std::string(kBlockSuffix));
        if (fs::exists(target)) continue;
        fs::path tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write " + tmp.string());
            out << block.serialize();
            if (!out.flush()) throw Error("cannot write " + tmp.string());
        }
        fs::rename(tmp, target);
        ++written;
    }
    return written;
}

ReplicaState load_pack(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(kBlockSuffix)) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    ReplicaState state;
    for (const auto& file : files) {
        auto name = file.filename().string();
        BlockId id = name.substr(0, name.size() - kBlockSuffix.size());
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error("cannot read " + file.string());
        std::ostringstream bytes;
        bytes << in.rdbuf();
        try {
            state.apply(DeltaBlock::parse(bytes.str(), id));
        } catch (const Error& e) {
            throw Error(file.string() + ": " + e.what());
        }
    }
    return state;
}

}  // namespace melda
