#include "risctl/nn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace risctl::nn {

static constexpr const char* kMagic = "risctl-checkpoint-v1";

void save_checkpoint(std::ostream& os, const std::vector<ParamTensor*>& params) {
    os << kMagic << "\n" << params.size() << "\n";
    char buf[64];
    for (const ParamTensor* p : params) {
        os << p->name << " " << p->value.rows << " " << p->value.cols << "\n";
        for (int i = 0; i < p->value.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", p->value.data[i]);
            os << buf << (i + 1 == p->value.size() ? "" : " ");
        }
        os << "\n";
    }
}

void save_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params) {
    std::ofstream os(path);
    if (!os) throw Error("save_checkpoint: cannot open " + path);
    save_checkpoint(os, params);
}

void load_checkpoint(std::istream& is, const std::vector<ParamTensor*>& params) {
    std::string magic;
    std::getline(is, magic);
    if (magic != kMagic)
        throw Error("load_checkpoint: bad magic line '" + magic + "'");
    size_t count = 0;
    is >> count;
    if (count != params.size())
        throw Error("load_checkpoint: parameter count mismatch");
    for (ParamTensor* p : params) {
        std::string name;
        int rows = 0, cols = 0;
        is >> name >> rows >> cols;
        if (name != p->name)
            throw Error("load_checkpoint: expected parameter '" + p->name +
                        "', found '" + name + "'");
        if (rows != p->value.rows || cols != p->value.cols)
            throw Error("load_checkpoint: shape mismatch for '" + name + "'");
        for (int i = 0; i < p->value.size(); ++i) {
            if (!(is >> p->value.data[i]))
                throw Error("load_checkpoint: truncated values for '" + name +
                            "'");
        }
        p->zero_grad();
    }
}

void load_checkpoint(const std::string& path,
                     const std::vector<ParamTensor*>& params) {
    std::ifstream is(path);
    if (!is) throw Error("load_checkpoint: cannot open " + path);
    load_checkpoint(is, params);
}

}  // namespace risctl::nn
