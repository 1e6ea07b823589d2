#pragma once

// Standalone SVG charts assembled by string: loss curves (train, val, meta F)
// against epochs, and the batch-size schedule as a step plot. No plotting
// library; output is deterministic for a given log.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/loop.hpp"

namespace hyperlearn {

namespace svg_detail {

inline constexpr int kWidth = 640;
inline constexpr int kHeight = 400;
inline constexpr int kMarginLeft = 64;
inline constexpr int kMarginRight = 24;
inline constexpr int kMarginTop = 36;
inline constexpr int kMarginBottom = 48;

struct Series {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
    bool step = false;  // draw as a step function
};

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string render_chart(const std::string& title, const std::string& xlabel,
                                const std::string& ylabel, const std::vector<Series>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax = ymin + (ymin == 0 ? 1.0 : std::abs(ymin) * 0.1);
        ymin -= (ymin == 0 ? 0.0 : std::abs(ymin) * 0.1);
    }
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return kMarginTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
           std::to_string(kHeight) + "\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           title + "</text>\n";

    // axes
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
           num(kMarginLeft) + "\" y2=\"" + num(kMarginTop + plot_h) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop + plot_h) + "\" x2=\"" +
           num(kMarginLeft + plot_w) + "\" y2=\"" + num(kMarginTop + plot_h) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(kMarginTop + plot_h) + "\" x2=\"" +
               num(px(fx)) + "\" y2=\"" + num(kMarginTop + plot_h + 5) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kMarginTop + plot_h + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               num(fx) + "</text>\n";
        out += "<line x1=\"" + num(kMarginLeft - 5) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" +
               num(kMarginLeft) + "\" y2=\"" + num(py(fy)) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(fy) +
               "</text>\n";
    }
    out += "<text x=\"" + std::to_string(kMarginLeft + static_cast<int>(plot_w) / 2) + "\" y=\"" +
           std::to_string(kHeight - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel +
           "</text>\n";
    out += "<text x=\"16\" y=\"" + std::to_string(kMarginTop + static_cast<int>(plot_h) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
           std::to_string(kMarginTop + static_cast<int>(plot_h) / 2) + ")\">" + ylabel +
           "</text>\n";

    // series
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        std::string pts;
        if (s.step) {
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                const auto [x, y] = s.points[i];
                pts += num(px(x)) + "," + num(py(y)) + " ";
                const double x_next = (i + 1 < s.points.size()) ? s.points[i + 1].first : x + 1.0;
                pts += num(px(x_next)) + "," + num(py(y)) + " ";
            }
        } else {
            for (const auto& [x, y] : s.points) pts += num(px(x)) + "," + num(py(y)) + " ";
        }
        if (!pts.empty()) pts.pop_back();
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"/>\n";
    }

    // legend
    double ly = kMarginTop + 8;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        const double lx = kMarginLeft + plot_w - 150;
        out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 22) +
               "\" y2=\"" + num(ly) + "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
        ly += 16;
    }
    out += "</svg>\n";
    return out;
}

// Per-epoch mean of a step-record field, NaN entries skipped.
template <typename Getter>
inline std::vector<std::pair<double, double>> epoch_means(const RunLog& log, Getter get) {
    std::vector<std::pair<double, double>> out;
    std::size_t cur = 0;
    double total = 0.0;
    std::size_t count = 0;
    auto flush = [&]() {
        if (count > 0) out.push_back({static_cast<double>(cur), total / static_cast<double>(count)});
        total = 0.0;
        count = 0;
    };
    for (const auto& s : log.steps) {
        if (s.epoch != cur) {
            flush();
            cur = s.epoch;
        }
        const double v = get(s);
        if (std::isfinite(v)) {
            total += v;
            ++count;
        }
    }
    flush();
    return out;
}

}  // namespace svg_detail

// Writes loss_curves.svg and batch_size.svg; returns the written paths.
// An empty log writes nothing.
inline std::vector<std::filesystem::path> emit_svg(const RunLog& log,
                                                   const std::filesystem::path& dir) {
    if (log.steps.empty() && log.epochs.empty()) return {};
    std::filesystem::create_directories(dir);
    namespace d = svg_detail;

    std::vector<d::Series> loss_series;
    d::Series train{"train loss", "#1f77b4",
                    d::epoch_means(log, [](const StepRecord& s) { return s.train_loss; })};
    d::Series meta{"meta loss F", "#2ca02c",
                   d::epoch_means(log, [](const StepRecord& s) { return s.meta_f; })};
    d::Series val{"val loss", "#d62728", {}};
    for (const auto& e : log.epochs) {
        val.points.push_back({static_cast<double>(e.epoch), e.val_loss});
    }
    loss_series.push_back(train);
    loss_series.push_back(val);
    if (!meta.points.empty()) loss_series.push_back(meta);

    d::Series schedule{"batch size", "#9467bd", {}, /*step=*/true};
    std::size_t cur_epoch = 0;
    for (const auto& s : log.steps) {
        if (s.epoch != cur_epoch) {
            schedule.points.push_back({static_cast<double>(s.epoch),
                                       static_cast<double>(s.batch_b)});
            cur_epoch = s.epoch;
        }
    }

    std::vector<std::filesystem::path> written;
    {
        const auto path = dir / "loss_curves.svg";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("svg: cannot write " + path.string());
        out << d::render_chart("Loss curves", "epoch", "loss", loss_series);
        written.push_back(path);
    }
    {
        const auto path = dir / "batch_size.svg";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("svg: cannot write " + path.string());
        out << d::render_chart("Batch size schedule", "epoch", "batch size", {schedule});
        written.push_back(path);
    }
    return written;
}

}  // namespace hyperlearn
