#include "linkfp/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "linkfp/dataset.hpp"
#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

nlohmann::json metrics_to_json(const EvalMetrics& m) {
    nlohmann::json j;
    j["accuracy"] = m.accuracy;
    j["macro_precision"] = m.macro_precision;
    j["macro_recall"] = m.macro_recall;
    j["macro_f1"] = m.macro_f1;
    j["classes"] = m.classes;
    j["confusion"] = m.confusion;
    return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void write_confusion_csv(const EvalMetrics& m, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "true\\pred";
    for (const std::string& c : m.classes) out << "," << c;
    out << "\n";
    for (std::size_t r = 0; r < m.classes.size(); ++r) {
        out << m.classes[r];
        for (std::size_t c = 0; c < m.classes.size(); ++c) out << "," << m.confusion[r][c];
        out << "\n";
    }
}

struct PlotFrame {
    double x0, x1, y0, y1;    // data range
    double px0 = 70, px1 = 570, py0 = 330, py1 = 30;  // pixel box (y flipped)

    double px(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double py(double y) const { return py0 + (y - y0) / (y1 - y0) * (py1 - py0); }
};

std::string svg_header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"12\">\n"
           "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
}

void svg_axes(std::ofstream& out, const PlotFrame& f, const std::string& x_label,
              const std::string& y_label) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n"
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n",
                  f.px0, f.py0, f.px1, f.py0, f.px0, f.py0, f.px0, f.py1);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"middle\">%s</text>\n",
                  (f.px0 + f.px1) / 2, f.py0 + 40, x_label.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"18\" y=\"%.0f\" transform=\"rotate(-90 18 %.0f)\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  (f.py0 + f.py1) / 2, (f.py0 + f.py1) / 2, y_label.c_str());
    out << buf;
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"middle\">%g</text>\n",
                      f.px(xv), f.py0 + 16, xv);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"end\">%g</text>\n",
                      f.px0 - 6, f.py(yv) + 4, yv);
        out << buf;
    }
}

void write_sweep_svg(const SweepCurveSet& sweep, const std::vector<std::string>& model_order,
                     const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    double x_min = 1e300, x_max = -1e300;
    for (const SweepPoint& p : sweep.points) {
        x_min = std::min(x_min, static_cast<double>(p.axis_value));
        x_max = std::max(x_max, static_cast<double>(p.axis_value));
    }
    if (x_max <= x_min) x_max = x_min + 1;
    PlotFrame f{x_min, x_max, 0.0, 1.0};
    out << svg_header();
    svg_axes(out, f, sweep.axis, "accuracy");
    char buf[256];
    for (std::size_t m = 0; m < model_order.size(); ++m) {
        const char* color = kPalette[m % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const SweepPoint& p : sweep.points) {
            if (p.model != model_order[m]) continue;
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", f.px(static_cast<double>(p.axis_value)),
                          f.py(p.mean_accuracy));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"580\" y=\"%zu\" fill=\"%s\">%s</text>\n", 40 + m * 16, color,
                      model_order[m].c_str());
        out << buf;
    }
    out << "</svg>\n";
}

void write_projection_svg(const std::vector<std::array<double, 2>>& points,
                          const std::vector<std::string>& labels,
                          const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& p : points) {
        x_min = std::min(x_min, p[0]);
        x_max = std::max(x_max, p[0]);
        y_min = std::min(y_min, p[1]);
        y_max = std::max(y_max, p[1]);
    }
    if (x_max <= x_min) x_max = x_min + 1;
    if (y_max <= y_min) y_max = y_min + 1;
    PlotFrame f{x_min, x_max, y_min, y_max};

    std::vector<std::string> classes;
    for (const std::string& l : labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());

    out << svg_header();
    svg_axes(out, f, "dim 1", "dim 2");
    char buf[256];
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t c = static_cast<std::size_t>(
            std::find(classes.begin(), classes.end(), labels[i]) - classes.begin());
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                      f.px(points[i][0]), f.py(points[i][1]), kPalette[c % 8]);
        out << buf;
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::snprintf(buf, sizeof buf, "<text x=\"580\" y=\"%zu\" fill=\"%s\">%s</text>\n",
                      40 + c * 16, kPalette[c % 8], classes[c].c_str());
        out << buf;
    }
    out << "</svg>\n";
}

void write_cv_svg(const std::map<std::string, std::vector<EvalMetrics>>& cv_folds,
                  const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    PlotFrame f{0.0, 1.0, 0.0, 1.0};
    out << svg_header();
    char buf[256];
    const char* metric_names[] = {"accuracy", "precision", "recall", "f1"};
    for (const auto& [model, folds] : cv_folds) {
        f.x0 = 0.0;
        f.x1 = static_cast<double>(std::max<std::size_t>(folds.size(), 1));
        svg_axes(out, f, "fold (" + model + ")", "metric");
        for (std::size_t i = 0; i < folds.size(); ++i) {
            const double values[] = {folds[i].accuracy, folds[i].macro_precision,
                                     folds[i].macro_recall, folds[i].macro_f1};
            for (int m = 0; m < 4; ++m) {
                std::snprintf(buf, sizeof buf,
                              "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                              f.px(static_cast<double>(i) + 0.1 + 0.2 * m), f.py(values[m]),
                              kPalette[m]);
                out << buf;
            }
        }
        for (int m = 0; m < 4; ++m) {
            std::snprintf(buf, sizeof buf, "<text x=\"580\" y=\"%d\" fill=\"%s\">%s</text>\n",
                          40 + m * 16, kPalette[m], metric_names[m]);
            out << buf;
        }
        break;  // one panel; cv currently runs for the flagship model only
    }
    out << "</svg>\n";
}

}  // namespace

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment_id;
    j["config"] = config_echo;
    nlohmann::json models = nlohmann::json::object();
    for (const auto& [name, metrics] : per_model) models[name] = metrics_to_json(metrics);
    j["models"] = models;
    j["model_order"] = model_order;
    if (gate_single_feature_accuracy >= 0.0)
        j["gate_single_feature_accuracy"] = gate_single_feature_accuracy;
    if (!cv_folds.empty()) {
        nlohmann::json cv = nlohmann::json::object();
        for (const auto& [name, folds] : cv_folds) {
            nlohmann::json arr = nlohmann::json::array();
            for (const EvalMetrics& m : folds) arr.push_back(metrics_to_json(m));
            cv[name] = arr;
        }
        j["cross_validation"] = cv;
    }
    if (sweep) {
        nlohmann::json points = nlohmann::json::array();
        for (const SweepPoint& p : sweep->points) {
            points.push_back({{"value", p.axis_value},
                              {"model", p.model},
                              {"mean_accuracy", p.mean_accuracy},
                              {"std_accuracy", p.std_accuracy}});
        }
        j["sweep"] = {{"axis", sweep->axis}, {"points", points}};
    }
    if (!open_world.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const OpenWorldRow& r : open_world) {
            rows.push_back({{"target", r.target},
                            {"unknown_count", r.unknown_count},
                            {"mean_accuracy", r.mean_accuracy},
                            {"std_accuracy", r.std_accuracy},
                            {"per_repetition", r.per_repetition}});
        }
        j["open_world"] = rows;
    }
    return j;
}

void emit_report(const Report& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());
    const fs::path dir(out_dir);

    {
        std::ofstream out = open_out(dir / "report.json");
        out << report.to_json().dump(2) << "\n";
    }

    for (std::size_t i = 0; i < report.model_order.size(); ++i) {
        const std::string& name = report.model_order[i];
        const auto it = report.per_model.find(name);
        if (it == report.per_model.end()) continue;
        write_confusion_csv(it->second, dir / ("confusion_" + name + ".csv"));
        if (i == 0) write_confusion_csv(it->second, dir / "confusion.csv");
    }

    if (report.sweep) {
        std::ofstream out = open_out(dir / "curves.csv");
        out << "axis,value,model,mean_accuracy,std_accuracy\n";
        for (const SweepPoint& p : report.sweep->points)
            out << report.sweep->axis << "," << p.axis_value << "," << p.model << ","
                << format_double(p.mean_accuracy) << "," << format_double(p.std_accuracy)
                << "\n";
        write_sweep_svg(*report.sweep, report.model_order, dir / "curves.svg");
    }

    if (!report.open_world.empty()) {
        std::ofstream out = open_out(dir / "open_world.csv");
        out << "target,unknown_count,mean_accuracy,std_accuracy\n";
        for (const OpenWorldRow& r : report.open_world)
            out << r.target << "," << r.unknown_count << "," << format_double(r.mean_accuracy)
                << "," << format_double(r.std_accuracy) << "\n";
    }

    if (!report.projection.empty()) {
        std::ofstream out = open_out(dir / "projection.csv");
        out << "x,y,label\n";
        for (std::size_t i = 0; i < report.projection.size(); ++i)
            out << format_double(report.projection[i][0]) << ","
                << format_double(report.projection[i][1]) << "," << report.projection_labels[i]
                << "\n";
        write_projection_svg(report.projection, report.projection_labels,
                             dir / "projection.svg");
    }

    if (!report.cv_folds.empty()) {
        std::ofstream out = open_out(dir / "cv.csv");
        out << "model,fold,accuracy,macro_precision,macro_recall,macro_f1\n";
        for (const auto& [name, folds] : report.cv_folds)
            for (std::size_t i = 0; i < folds.size(); ++i)
                out << name << "," << i << "," << format_double(folds[i].accuracy) << ","
                    << format_double(folds[i].macro_precision) << ","
                    << format_double(folds[i].macro_recall) << ","
                    << format_double(folds[i].macro_f1) << "\n";
        write_cv_svg(report.cv_folds, dir / "cv.svg");
    }
}

}  // namespace linkfp
