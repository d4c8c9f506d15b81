#include "lprnn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lprnn {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "lprnn-checkpoint";
constexpr int kVersion = 1;

json encode_matrix(const Matrix& m) {
    json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["data"] = m.data;
    return j;
}

json encode_vector(const Vector& v) { return json(v.data); }

Matrix decode_matrix(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw IoError("checkpoint: malformed matrix for " + what);
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols)
        throw IoError("checkpoint: matrix size mismatch for " + what);
    Matrix m(rows, cols);
    m.data = data;
    return m;
}

Vector decode_vector(const json& j, const std::string& what) {
    if (!j.is_array()) throw IoError("checkpoint: malformed vector for " + what);
    Vector v(j.size());
    v.data = j.get<std::vector<double>>();
    return v;
}

json encode_dense(const Dense& d) {
    json j;
    j["w"] = encode_matrix(d.w);
    j["b"] = encode_vector(d.b);
    return j;
}

Dense decode_dense(const json& j, const std::string& what) {
    if (!j.is_object()) throw IoError("checkpoint: malformed readout for " + what);
    Dense d;
    d.w = decode_matrix(j.at("w"), what + ".w");
    d.b = decode_vector(j.at("b"), what + ".b");
    if (d.b.size() != d.w.rows) throw IoError("checkpoint: readout bias mismatch for " + what);
    return d;
}

Activation decode_activation(const json& j, const std::string& what) {
    if (!j.is_string()) throw IoError("checkpoint: malformed activation for " + what);
    try {
        return activation_from_name(j.get<std::string>());
    } catch (const DomainError& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    }
}

json load_document(const std::string& path, const std::string& expect_kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw IoError("checkpoint is not valid JSON: " + path + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != kFormatTag)
        throw IoError("not a checkpoint file: " + path);
    if (doc.value("version", 0) != kVersion)
        throw IoError("unsupported checkpoint version in " + path);
    if (!expect_kind.empty() && doc.value("kind", "") != expect_kind)
        throw IoError("checkpoint " + path + " holds a \"" + doc.value("kind", "?") +
                      "\" model, expected \"" + expect_kind + "\"");
    return doc;
}

void write_document(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

json header(const char* kind) {
    json doc;
    doc["format"] = kFormatTag;
    doc["version"] = kVersion;
    doc["kind"] = kind;
    return doc;
}

}  // namespace

void save_checkpoint(const std::string& path, const LpRnnParams& cell, const Dense& readout) {
    cell.validate();
    json doc = header("lprnn");
    doc["w_in"] = encode_matrix(cell.w_in);
    doc["w_rec"] = encode_matrix(cell.w_rec);
    doc["b"] = encode_vector(cell.b);
    doc["alpha"] = encode_vector(cell.alpha);
    doc["activation"] = activation_name(cell.activation);
    doc["train_alpha"] = cell.train_alpha;
    if (cell.train_alpha) doc["alpha_logit"] = encode_vector(cell.alpha_logit);
    doc["readout"] = encode_dense(readout);
    write_document(path, doc);
}

void save_checkpoint(const std::string& path, const LpLstmParams& cell, const Dense& readout) {
    cell.validate();
    json doc = header("lplstm");
    doc["w_f"] = encode_matrix(cell.w_f);
    doc["w_i"] = encode_matrix(cell.w_i);
    doc["w_o"] = encode_matrix(cell.w_o);
    doc["w_c"] = encode_matrix(cell.w_c);
    doc["w_rec_f"] = encode_matrix(cell.w_rec_f);
    doc["w_rec_i"] = encode_matrix(cell.w_rec_i);
    doc["w_rec_o"] = encode_matrix(cell.w_rec_o);
    doc["w_rec_c"] = encode_matrix(cell.w_rec_c);
    doc["b_f"] = encode_vector(cell.b_f);
    doc["b_i"] = encode_vector(cell.b_i);
    doc["b_o"] = encode_vector(cell.b_o);
    doc["b_c"] = encode_vector(cell.b_c);
    doc["alpha"] = encode_vector(cell.alpha);
    doc["state_activation"] = activation_name(cell.state_activation);
    doc["output_activation"] = activation_name(cell.output_activation);
    doc["readout"] = encode_dense(readout);
    write_document(path, doc);
}

void save_checkpoint(const std::string& path, const EsnParams& esn) {
    json doc = header("esn");
    doc["w_in"] = encode_matrix(esn.w_in);
    doc["w_rec"] = encode_matrix(esn.w_rec);
    doc["alpha"] = encode_vector(esn.alpha);
    doc["activation"] = activation_name(esn.activation);
    doc["rho_target"] = esn.rho_target;
    doc["readout"] = encode_dense(esn.readout);
    write_document(path, doc);
}

std::string checkpoint_kind(const std::string& path) {
    return load_document(path, "").value("kind", "");
}

LpRnnCheckpoint load_lprnn_checkpoint(const std::string& path) try {
    const json doc = load_document(path, "lprnn");
    LpRnnCheckpoint out;
    out.cell.w_in = decode_matrix(doc.at("w_in"), "w_in");
    out.cell.w_rec = decode_matrix(doc.at("w_rec"), "w_rec");
    out.cell.b = decode_vector(doc.at("b"), "b");
    out.cell.alpha = decode_vector(doc.at("alpha"), "alpha");
    out.cell.activation = decode_activation(doc.at("activation"), "activation");
    out.cell.train_alpha = doc.value("train_alpha", false);
    if (out.cell.train_alpha)
        out.cell.alpha_logit = decode_vector(doc.at("alpha_logit"), "alpha_logit");
    out.readout = decode_dense(doc.at("readout"), "readout");
    try {
        out.cell.validate();
    } catch (const std::exception& e) {
        throw IoError(std::string("checkpoint holds an inconsistent model: ") + e.what());
    }
    return out;
} catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": " + e.what());
}

LpLstmCheckpoint load_lplstm_checkpoint(const std::string& path) try {
    const json doc = load_document(path, "lplstm");
    LpLstmCheckpoint out;
    out.cell.w_f = decode_matrix(doc.at("w_f"), "w_f");
    out.cell.w_i = decode_matrix(doc.at("w_i"), "w_i");
    out.cell.w_o = decode_matrix(doc.at("w_o"), "w_o");
    out.cell.w_c = decode_matrix(doc.at("w_c"), "w_c");
    out.cell.w_rec_f = decode_matrix(doc.at("w_rec_f"), "w_rec_f");
    out.cell.w_rec_i = decode_matrix(doc.at("w_rec_i"), "w_rec_i");
    out.cell.w_rec_o = decode_matrix(doc.at("w_rec_o"), "w_rec_o");
    out.cell.w_rec_c = decode_matrix(doc.at("w_rec_c"), "w_rec_c");
    out.cell.b_f = decode_vector(doc.at("b_f"), "b_f");
    out.cell.b_i = decode_vector(doc.at("b_i"), "b_i");
    out.cell.b_o = decode_vector(doc.at("b_o"), "b_o");
    out.cell.b_c = decode_vector(doc.at("b_c"), "b_c");
    out.cell.alpha = decode_vector(doc.at("alpha"), "alpha");
    out.cell.state_activation = decode_activation(doc.at("state_activation"), "state_activation");
    out.cell.output_activation =
        decode_activation(doc.at("output_activation"), "output_activation");
    out.readout = decode_dense(doc.at("readout"), "readout");
    try {
        out.cell.validate();
    } catch (const std::exception& e) {
        throw IoError(std::string("checkpoint holds an inconsistent model: ") + e.what());
    }
    return out;
} catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": " + e.what());
}

EsnParams load_esn_checkpoint(const std::string& path) try {
    const json doc = load_document(path, "esn");
    EsnParams esn;
    esn.w_in = decode_matrix(doc.at("w_in"), "w_in");
    esn.w_rec = decode_matrix(doc.at("w_rec"), "w_rec");
    esn.alpha = decode_vector(doc.at("alpha"), "alpha");
    esn.activation = decode_activation(doc.at("activation"), "activation");
    if (!doc.contains("rho_target") || !doc.at("rho_target").is_number())
        throw IoError("checkpoint: missing rho_target");
    esn.rho_target = doc.at("rho_target").get<double>();
    esn.readout = decode_dense(doc.at("readout"), "readout");
    if (esn.w_rec.rows != esn.w_rec.cols || esn.w_in.rows != esn.w_rec.rows ||
        esn.alpha.size() != esn.w_rec.rows)
        throw IoError("checkpoint holds an inconsistent reservoir");
    return esn;
} catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": " + e.what());
}

}  // namespace lprnn
