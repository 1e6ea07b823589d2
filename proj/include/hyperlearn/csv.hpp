#pragma once

// RunLog serialization. Step and epoch files carry fixed column sets; floats
// print with %.17g so a parse -> emit round trip is byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/loop.hpp"

namespace hyperlearn {

inline constexpr const char* kStepsHeader =
    "epoch,t,train_loss,meta_loss_F,batch_size_B,mixed_sample_s,candidate_B,lr_eta";
inline constexpr const char* kEpochsHeader = "epoch,val_loss,val_acc,next_B";

namespace csv_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw validation_error("csv: bad number '" + s + "' in " + context);
    }
    return v;
}

inline std::size_t parse_size(const std::string& s, const std::string& context) {
    const double v = parse_double(s, context);
    return static_cast<std::size_t>(v);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw io_error("csv: cannot write " + p.string());
    return out;
}

}  // namespace csv_detail

// Writes steps.csv and epochs.csv (header rows always present).
inline void emit_csv(const RunLog& log, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = csv_detail::open_out(dir / "steps.csv");
        out << kStepsHeader << "\n";
        for (const auto& s : log.steps) {
            out << s.epoch << ',' << s.t << ',' << csv_detail::fmt(s.train_loss) << ','
                << csv_detail::fmt(s.meta_f) << ',' << s.batch_b << ','
                << csv_detail::fmt(s.mixed_s) << ',' << csv_detail::fmt(s.candidate_b) << ','
                << csv_detail::fmt(s.eta) << "\n";
        }
    }
    {
        auto out = csv_detail::open_out(dir / "epochs.csv");
        out << kEpochsHeader << "\n";
        for (const auto& e : log.epochs) {
            out << e.epoch << ',' << csv_detail::fmt(e.val_loss) << ','
                << csv_detail::fmt(e.val_acc) << ',' << e.next_b << "\n";
        }
    }
}

// Reads a steps.csv/epochs.csv pair back into a RunLog.
inline RunLog load_run_log(const std::filesystem::path& dir) {
    RunLog log;
    {
        const auto path = dir / "steps.csv";
        std::ifstream in(path);
        if (!in) throw io_error("csv: cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw validation_error("csv: empty " + path.string());
        if (line != kStepsHeader) {
            throw validation_error("csv: unexpected header in " + path.string());
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = csv_detail::split_line(line);
            if (f.size() != 8) {
                throw validation_error("csv: expected 8 columns in " + path.string());
            }
            StepRecord s;
            s.epoch = csv_detail::parse_size(f[0], "steps.csv");
            s.t = csv_detail::parse_size(f[1], "steps.csv");
            s.train_loss = csv_detail::parse_double(f[2], "steps.csv");
            s.meta_f = csv_detail::parse_double(f[3], "steps.csv");
            s.batch_b = csv_detail::parse_size(f[4], "steps.csv");
            s.mixed_s = csv_detail::parse_double(f[5], "steps.csv");
            s.candidate_b = csv_detail::parse_double(f[6], "steps.csv");
            s.eta = csv_detail::parse_double(f[7], "steps.csv");
            log.steps.push_back(s);
        }
    }
    {
        const auto path = dir / "epochs.csv";
        std::ifstream in(path);
        if (!in) throw io_error("csv: cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw validation_error("csv: empty " + path.string());
        if (line != kEpochsHeader) {
            throw validation_error("csv: unexpected header in " + path.string());
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = csv_detail::split_line(line);
            if (f.size() != 4) {
                throw validation_error("csv: expected 4 columns in " + path.string());
            }
            EpochRecord e;
            e.epoch = csv_detail::parse_size(f[0], "epochs.csv");
            e.val_loss = csv_detail::parse_double(f[1], "epochs.csv");
            e.val_acc = csv_detail::parse_double(f[2], "epochs.csv");
            e.next_b = csv_detail::parse_size(f[3], "epochs.csv");
            log.epochs.push_back(e);
        }
    }
    return log;
}

// Config echo + version; the file is itself a loadable config.
inline void write_manifest(const std::map<std::string, std::string>& resolved,
                           const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto out = csv_detail::open_out(dir / "manifest.txt");
    out << "# " << kVersion << "\n";
    for (const auto& [k, v] : resolved) {
        out << k << " = " << v << "\n";
    }
}

}  // namespace hyperlearn
