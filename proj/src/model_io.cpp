#include "linkfp/model_io.hpp"

#include <fstream>
#include <sstream>

#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

constexpr int kFormatVersion = 1;

void write_vector(std::ostream& out, const std::string& name, const VecX<double>& v) {
    out << name << " " << v.size() << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out << format_double(v(i)) << (i + 1 == v.size() ? "\n" : " ");
    if (v.size() == 0) out << "\n";
}

void write_matrix(std::ostream& out, const std::string& name, const MatX<double>& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << format_double(m(r, c)) << (c + 1 == m.cols() ? "\n" : " ");
    }
}

class Reader {
public:
    Reader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

    std::string token() {
        std::string t;
        if (!(in_ >> t)) throw ParseError(origin_ + ": unexpected end of model file");
        return t;
    }

    void expect(const std::string& want) {
        const std::string got = token();
        if (got != want)
            throw ParseError(origin_ + ": expected '" + want + "', got '" + got + "'");
    }

    long integer() {
        const std::string t = token();
        try {
            return std::stol(t);
        } catch (const std::exception&) {
            throw ParseError(origin_ + ": expected integer, got '" + t + "'");
        }
    }

    double real() {
        const std::string t = token();
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end != '\0')
            throw ParseError(origin_ + ": expected number, got '" + t + "'");
        return v;
    }

    VecX<double> vector(const std::string& name) {
        expect(name);
        VecX<double> v(integer());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = real();
        return v;
    }

    MatX<double> matrix(const std::string& name) {
        expect(name);
        const long rows = integer();
        const long cols = integer();
        MatX<double> m(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) m(r, c) = real();
        return m;
    }

private:
    std::istream& in_;
    std::string origin_;
};

void write_forest(std::ostream& out, const ForestModel& model) {
    out << "params " << model.params.n_trees << " " << model.params.max_depth << " "
        << model.params.max_features << " " << model.params.min_leaf << " "
        << (model.params.bootstrap ? 1 : 0) << "\n";
    out << "trees " << model.trees.size() << "\n";
    for (const DecisionTree& tree : model.trees) {
        out << "tree " << tree.nodes.size() << "\n";
        for (const TreeNode& node : tree.nodes) {
            out << node.feature << " " << format_double(node.threshold) << " " << node.left
                << " " << node.right;
            for (long c : node.counts) out << " " << c;
            out << "\n";
        }
    }
}

ForestModel read_forest(Reader& in, std::vector<std::string> classes, std::size_t n_features) {
    ForestModel model;
    model.classes = std::move(classes);
    model.n_features = n_features;
    in.expect("params");
    model.params.n_trees = static_cast<int>(in.integer());
    model.params.max_depth = static_cast<int>(in.integer());
    model.params.max_features = static_cast<int>(in.integer());
    model.params.min_leaf = static_cast<int>(in.integer());
    model.params.bootstrap = in.integer() != 0;
    in.expect("trees");
    model.trees.resize(static_cast<std::size_t>(in.integer()));
    for (DecisionTree& tree : model.trees) {
        in.expect("tree");
        tree.nodes.resize(static_cast<std::size_t>(in.integer()));
        for (TreeNode& node : tree.nodes) {
            node.feature = static_cast<int>(in.integer());
            node.threshold = in.real();
            node.left = static_cast<int>(in.integer());
            node.right = static_cast<int>(in.integer());
            node.counts.resize(model.classes.size());
            for (long& c : node.counts) c = in.integer();
        }
    }
    return model;
}

void write_svm(std::ostream& out, const SvmModel& model) {
    out << "params " << format_double(model.params.C) << " " << format_double(model.params.tol)
        << " " << model.params.max_iter << "\n";
    out << "gamma " << format_double(model.gamma) << "\n";
    out << "machines " << model.machines.size() << "\n";
    for (const BinarySvm& m : model.machines) {
        out << "machine " << m.class_pos << " " << m.class_neg << " " << m.support_vectors.size()
            << " " << format_double(m.bias) << " " << format_double(m.kkt_residual) << "\n";
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
            out << format_double(m.dual_coef[s]);
            for (double v : m.support_vectors[s]) out << " " << format_double(v);
            out << "\n";
        }
    }
}

SvmModel read_svm(Reader& in, std::vector<std::string> classes, std::size_t n_features) {
    SvmModel model;
    model.classes = std::move(classes);
    model.n_features = n_features;
    in.expect("params");
    model.params.C = in.real();
    model.params.tol = in.real();
    model.params.max_iter = in.integer();
    in.expect("gamma");
    model.gamma = in.real();
    in.expect("machines");
    model.machines.resize(static_cast<std::size_t>(in.integer()));
    for (BinarySvm& m : model.machines) {
        in.expect("machine");
        m.class_pos = static_cast<int>(in.integer());
        m.class_neg = static_cast<int>(in.integer());
        const long n_sv = in.integer();
        m.bias = in.real();
        m.kkt_residual = in.real();
        m.support_vectors.resize(static_cast<std::size_t>(n_sv));
        m.dual_coef.resize(static_cast<std::size_t>(n_sv));
        for (long s = 0; s < n_sv; ++s) {
            m.dual_coef[static_cast<std::size_t>(s)] = in.real();
            m.support_vectors[static_cast<std::size_t>(s)].resize(n_features);
            for (std::size_t f = 0; f < n_features; ++f)
                m.support_vectors[static_cast<std::size_t>(s)][f] = in.real();
        }
    }
    return model;
}

void write_mlp(std::ostream& out, const MlpModel& model) {
    out << "params " << format_double(model.params.lr) << " " << model.params.epochs << " "
        << model.params.hidden1 << " " << model.params.hidden2 << "\n";
    write_matrix(out, "w1", model.net.w1);
    write_vector(out, "b1", model.net.b1);
    write_matrix(out, "w2", model.net.w2);
    write_vector(out, "b2", model.net.b2);
    write_matrix(out, "w3", model.net.w3);
    write_vector(out, "b3", model.net.b3);
}

MlpModel read_mlp(Reader& in, std::vector<std::string> classes, std::size_t n_features) {
    MlpModel model;
    model.classes = std::move(classes);
    model.n_features = n_features;
    in.expect("params");
    model.params.lr = in.real();
    model.params.epochs = static_cast<int>(in.integer());
    model.params.hidden1 = static_cast<int>(in.integer());
    model.params.hidden2 = static_cast<int>(in.integer());
    model.net.w1 = in.matrix("w1");
    model.net.b1 = in.vector("b1");
    model.net.w2 = in.matrix("w2");
    model.net.b2 = in.vector("b2");
    model.net.w3 = in.matrix("w3");
    model.net.b3 = in.vector("b3");
    return model;
}

void write_conv1d(std::ostream& out, const Conv1dModel& model) {
    out << "params " << format_double(model.params.lr) << " " << model.params.epochs << " "
        << model.params.filters << " " << model.params.kernel_width << " "
        << model.params.hidden1 << " " << model.params.hidden2 << " "
        << format_double(model.params.bn_eps) << "\n";
    write_matrix(out, "wc", model.net.wc);
    write_vector(out, "bc", model.net.bc);
    write_vector(out, "bn_gamma", model.net.bn_gamma);
    write_vector(out, "bn_beta", model.net.bn_beta);
    write_vector(out, "bn_run_mean", model.net.bn_run_mean);
    write_vector(out, "bn_run_var", model.net.bn_run_var);
    write_matrix(out, "w1", model.net.w1);
    write_vector(out, "b1", model.net.b1);
    write_matrix(out, "w2", model.net.w2);
    write_vector(out, "b2", model.net.b2);
    write_matrix(out, "w3", model.net.w3);
    write_vector(out, "b3", model.net.b3);
}

Conv1dModel read_conv1d(Reader& in, std::vector<std::string> classes, std::size_t n_features) {
    Conv1dModel model;
    model.classes = std::move(classes);
    model.n_features = n_features;
    in.expect("params");
    model.params.lr = in.real();
    model.params.epochs = static_cast<int>(in.integer());
    model.params.filters = static_cast<int>(in.integer());
    model.params.kernel_width = static_cast<int>(in.integer());
    model.params.hidden1 = static_cast<int>(in.integer());
    model.params.hidden2 = static_cast<int>(in.integer());
    model.params.bn_eps = in.real();
    model.net.input_len = static_cast<int>(n_features);
    model.net.filters = model.params.filters;
    model.net.kwidth = model.params.kernel_width;
    model.net.conv_out = model.net.input_len - model.net.kwidth + 1;
    model.net.bn_eps = model.params.bn_eps;
    model.net.wc = in.matrix("wc");
    model.net.bc = in.vector("bc");
    model.net.bn_gamma = in.vector("bn_gamma");
    model.net.bn_beta = in.vector("bn_beta");
    model.net.bn_run_mean = in.vector("bn_run_mean");
    model.net.bn_run_var = in.vector("bn_run_var");
    model.net.w1 = in.matrix("w1");
    model.net.b1 = in.vector("b1");
    model.net.w2 = in.matrix("w2");
    model.net.b2 = in.vector("b2");
    model.net.w3 = in.matrix("w3");
    model.net.b3 = in.vector("b3");
    return model;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Forest: return "forest";
        case ModelKind::Svm: return "svm";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Conv1d: return "conv1d";
    }
    throw InternalError("model_kind_name: bad enum");
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "forest") return ModelKind::Forest;
    if (name == "svm") return ModelKind::Svm;
    if (name == "mlp") return ModelKind::Mlp;
    if (name == "conv1d") return ModelKind::Conv1d;
    throw ValidationError("unknown model kind '" + name + "'");
}

ModelKind TrainedModel::kind() const {
    return static_cast<ModelKind>(model.index());
}

const std::vector<std::string>& TrainedModel::classes() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.classes; },
                      model);
}

std::string TrainedModel::predict(std::span<const double> row) const {
    if (!norm) return std::visit([&](const auto& m) { return m.predict(row); }, model);
    std::vector<double> scaled(row.begin(), row.end());
    const double span = norm->max - norm->min;
    for (double& v : scaled) v = std::clamp((v - norm->min) / span, 0.0, 1.0);
    return std::visit([&](const auto& m) { return m.predict(std::span<const double>(scaled)); },
                      model);
}

std::vector<std::string> TrainedModel::predict_batch(const LabeledDataset& dataset) const {
    std::vector<std::string> out;
    out.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) out.push_back(predict(dataset.row(i)));
    return out;
}

void save_model(const TrainedModel& trained, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "linkfp-model " << kFormatVersion << "\n";
    out << "kind " << model_kind_name(trained.kind()) << "\n";
    if (trained.norm)
        out << "norm " << format_double(trained.norm->min) << " "
            << format_double(trained.norm->max) << "\n";
    else
        out << "norm none\n";

    const auto& classes = trained.classes();
    out << "classes " << classes.size() << "\n";
    for (const std::string& c : classes) out << c << "\n";
    const std::size_t n_features =
        std::visit([](const auto& m) { return m.n_features; }, trained.model);
    out << "features " << n_features << "\n";

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ForestModel>) write_forest(out, m);
            else if constexpr (std::is_same_v<T, SvmModel>) write_svm(out, m);
            else if constexpr (std::is_same_v<T, MlpModel>) write_mlp(out, m);
            else write_conv1d(out, m);
        },
        trained.model);
    out << "end\n";
    if (!out) throw IoError("write failed: " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    Reader reader(in, path);
    reader.expect("linkfp-model");
    const long version = reader.integer();
    if (version != kFormatVersion)
        throw ParseError(path + ": unsupported model format version " + std::to_string(version));
    reader.expect("kind");
    const ModelKind kind = model_kind_from_name(reader.token());

    TrainedModel trained;
    reader.expect("norm");
    const std::string norm_token = reader.token();
    if (norm_token != "none") {
        NormMeta meta;
        char* end = nullptr;
        meta.min = std::strtod(norm_token.c_str(), &end);
        if (end == norm_token.c_str() || *end != '\0')
            throw ParseError(path + ": bad norm minimum '" + norm_token + "'");
        meta.max = reader.real();
        trained.norm = meta;
    }

    reader.expect("classes");
    std::vector<std::string> classes(static_cast<std::size_t>(reader.integer()));
    for (std::string& c : classes) c = reader.token();
    reader.expect("features");
    const std::size_t n_features = static_cast<std::size_t>(reader.integer());

    switch (kind) {
        case ModelKind::Forest:
            trained.model = read_forest(reader, std::move(classes), n_features);
            break;
        case ModelKind::Svm:
            trained.model = read_svm(reader, std::move(classes), n_features);
            break;
        case ModelKind::Mlp:
            trained.model = read_mlp(reader, std::move(classes), n_features);
            break;
        case ModelKind::Conv1d:
            trained.model = read_conv1d(reader, std::move(classes), n_features);
            break;
    }
    reader.expect("end");
    return trained;
}

}  // namespace linkfp
