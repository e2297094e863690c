#include "fedfft/tensor.hpp"

#include <cmath>
#include <string>

namespace fedfft {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyUpdateSet: return "EmptyUpdateSet";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::MissingCoordinate: return "MissingCoordinate";
        case ErrorCode::ExtraCoordinate: return "ExtraCoordinate";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::EmptyVector: return "EmptyVector";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::TrimTooLarge: return "TrimTooLarge";
        case ErrorCode::TooFewClients: return "TooFewClients";
        case ErrorCode::SubsetTooLarge: return "SubsetTooLarge";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::UnknownClientId: return "UnknownClientId";
        case ErrorCode::Format: return "Format";
    }
    return "Unknown";
}

TensorShape::TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "tensor shape needs at least one extent");
    }
    numel_ = 1;
    for (auto d : dims_) {
        if (d == 0) throw Error(ErrorCode::InvalidArgument, "tensor extents must be >= 1");
        numel_ *= d;
    }
}

ModelWeights::ModelWeights(std::vector<Layer> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.shape.rank() == 0 || layer.data.size() != layer.shape.numel()) {
            throw Error(ErrorCode::ShapeMismatch,
                        "layer " + std::to_string(l) + " holds " + std::to_string(layer.data.size()) +
                            " values for " + std::to_string(layer.shape.numel()) + " elements");
        }
        for (double v : layer.data) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFinite, "layer " + std::to_string(l) + " contains a non-finite value");
            }
        }
    }
}

std::size_t ModelWeights::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.data.size();
    return n;
}

bool ModelWeights::same_shape(const ModelWeights& other) const noexcept {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (!(layers_[l].shape == other.layers_[l].shape)) return false;
    }
    return true;
}

std::vector<double> ModelWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& layer : layers_) flat.insert(flat.end(), layer.data.begin(), layer.data.end());
    return flat;
}

ModelWeights ModelWeights::unflatten(std::span<const double> flat) const {
    if (flat.size() != parameter_count()) {
        throw Error(ErrorCode::ShapeMismatch, "flat vector length does not match parameter count");
    }
    std::vector<Layer> out;
    out.reserve(layers_.size());
    std::size_t offset = 0;
    for (const auto& layer : layers_) {
        auto n = layer.data.size();
        out.push_back(Layer{layer.shape, std::vector<double>(flat.begin() + offset, flat.begin() + offset + n)});
        offset += n;
    }
    return ModelWeights(std::move(out));
}

ModelWeights zeros_like(const ModelWeights& w) {
    std::vector<Layer> out;
    for (const auto& layer : w.layers()) out.push_back(Layer{layer.shape, std::vector<double>(layer.data.size(), 0.0)});
    return ModelWeights(std::move(out));
}

ClientUpdate::ClientUpdate(std::size_t id, ModelWeights w, std::size_t size)
    : client_id(id), weights(std::move(w)), dataset_size(size) {
    if (dataset_size == 0) throw Error(ErrorCode::InvalidArgument, "dataset_size must be >= 1");
}

void validate_uniform(std::span<const ClientUpdate> updates) {
    if (updates.empty()) throw Error(ErrorCode::EmptyUpdateSet, "no client updates");
    const auto& ref = updates.front().weights;
    for (const auto& u : updates.subspan(1)) {
        const auto& w = u.weights;
        if (w.num_layers() != ref.num_layers()) {
            throw ShapeMismatchError(u.client_id, std::min(w.num_layers(), ref.num_layers()),
                                     "client " + std::to_string(u.client_id) + " has " +
                                         std::to_string(w.num_layers()) + " layers, expected " +
                                         std::to_string(ref.num_layers()));
        }
        for (std::size_t l = 0; l < ref.num_layers(); ++l) {
            if (!(w.layer(l).shape == ref.layer(l).shape)) {
                throw ShapeMismatchError(u.client_id, l,
                                         "client " + std::to_string(u.client_id) + " layer " +
                                             std::to_string(l) + " shape differs");
            }
        }
    }
}

CoordinateStream::CoordinateStream(std::span<const ClientUpdate> updates) : updates_(updates) {
    validate_uniform(updates_);
    total_ = updates_.front().weights.parameter_count();
}

bool CoordinateStream::next(CoordinateVector& out) {
    const auto& ref = updates_.front().weights;
    while (layer_ < ref.num_layers() && index_ >= ref.layer(layer_).data.size()) {
        ++layer_;
        index_ = 0;
    }
    if (layer_ >= ref.num_layers()) return false;

    out.layer_index = layer_;
    out.coord_index = index_;
    out.values.resize(updates_.size());
    for (std::size_t k = 0; k < updates_.size(); ++k) {
        out.values[k] = updates_[k].weights.layer(layer_).data[index_];
    }
    ++index_;
    return true;
}

std::vector<CoordinateVector> coordinate_views(std::span<const ClientUpdate> updates) {
    CoordinateStream stream(updates);
    std::vector<CoordinateVector> out;
    out.reserve(stream.total());
    CoordinateVector v;
    while (stream.next(v)) out.push_back(v);
    return out;
}

ModelWeights coordinate_wise(std::span<const ClientUpdate> updates,
                             const std::function<double(const CoordinateVector&)>& reduce) {
    CoordinateStream stream(updates);
    const auto& ref = updates.front().weights;
    std::vector<Layer> out;
    for (const auto& layer : ref.layers()) out.push_back(Layer{layer.shape, std::vector<double>(layer.data.size())});

    CoordinateVector v;
    while (stream.next(v)) out[v.layer_index].data[v.coord_index] = reduce(v);
    return ModelWeights(std::move(out));
}

ModelWeights reassemble(const ModelWeights& tmpl, const std::map<CoordinateKey, double>& selected) {
    std::vector<Layer> out;
    for (const auto& layer : tmpl.layers()) out.push_back(Layer{layer.shape, std::vector<double>(layer.data.size())});

    for (const auto& [key, value] : selected) {
        if (key.layer >= out.size() || key.index >= out[key.layer].data.size()) {
            throw Error(ErrorCode::ExtraCoordinate,
                        "coordinate (" + std::to_string(key.layer) + "," + std::to_string(key.index) +
                            ") is not part of the template");
        }
        out[key.layer].data[key.index] = value;
    }
    if (selected.size() != tmpl.parameter_count()) {
        for (std::size_t l = 0; l < out.size(); ++l) {
            for (std::size_t i = 0; i < out[l].data.size(); ++i) {
                if (!selected.contains(CoordinateKey{l, i})) {
                    throw Error(ErrorCode::MissingCoordinate,
                                "coordinate (" + std::to_string(l) + "," + std::to_string(i) + ") not selected");
                }
            }
        }
    }
    return ModelWeights(std::move(out));
}

namespace {

void require_same_shape(const ModelWeights& a, const ModelWeights& b) {
    if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "operands have different shapes");
}

template <typename Op>
ModelWeights zip(const ModelWeights& a, const ModelWeights& b, Op op) {
    require_same_shape(a, b);
    std::vector<Layer> out;
    out.reserve(a.num_layers());
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        const auto& x = a.layer(l).data;
        const auto& y = b.layer(l).data;
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = op(x[i], y[i]);
        out.push_back(Layer{a.layer(l).shape, std::move(z)});
    }
    return ModelWeights(std::move(out));
}

}  // namespace

double l2_norm(const ModelWeights& w) {
    double s = 0.0;
    for (const auto& layer : w.layers()) {
        for (double v : layer.data) s += v * v;
    }
    return std::sqrt(s);
}

double squared_distance(const ModelWeights& a, const ModelWeights& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        const auto& x = a.layer(l).data;
        const auto& y = b.layer(l).data;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = x[i] - y[i];
            s += d * d;
        }
    }
    return s;
}

ModelWeights scale(const ModelWeights& w, double c) {
    std::vector<Layer> out;
    out.reserve(w.num_layers());
    for (const auto& layer : w.layers()) {
        Layer scaled{layer.shape, layer.data};
        for (double& v : scaled.data) v *= c;
        out.push_back(std::move(scaled));
    }
    return ModelWeights(std::move(out));
}

ModelWeights add(const ModelWeights& a, const ModelWeights& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}

ModelWeights sub(const ModelWeights& a, const ModelWeights& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}

}  // namespace fedfft
