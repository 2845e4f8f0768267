#include "rom/nn/network.hpp"

#include "rom/binary_io.hpp"
#include "rom/error.hpp"

#include <istream>
#include <ostream>

namespace rom::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Tensor reshape_batch(const Tensor& x, const Shape& sample_shape)
{
    Shape s{x.dim(0)};
    s.insert(s.end(), sample_shape.begin(), sample_shape.end());
    return x.reshaped(std::move(s));
}

Tensor run_layer(const Layer& layer, const Tensor& x)
{
    return std::visit(overloaded{
                          [&](const ConvLayer& l) { return l.transposed ? deconv_forward(l, x) : conv_forward(l, x); },
                          [&](const DenseLayer& l) { return dense_forward(l, x); },
                          [&](const ActivationLayer& l) { return activation_forward(l.kind, x); },
                          [&](const ReshapeLayer& l) { return reshape_batch(x, l.sample_shape); },
                      },
                      layer);
}

} // namespace

Tensor Network::forward(const Tensor& x) const
{
    Tensor cur = x;
    for (const auto& layer : layers_) cur = run_layer(layer, cur);
    return cur;
}

Tensor Network::forward(const Tensor& x, std::vector<Tensor>& trace) const
{
    trace.clear();
    trace.reserve(layers_.size() + 1);
    trace.push_back(x);
    for (const auto& layer : layers_) trace.push_back(run_layer(layer, trace.back()));
    return trace.back();
}

Tensor Network::backward(const std::vector<Tensor>& trace, const Tensor& grad_out,
                         std::vector<Tensor>& param_grads) const
{
    if (trace.size() != layers_.size() + 1) throw ShapeError("backward: trace does not match the network");
    if (param_grads.empty()) {
        for (const Tensor* p : parameters()) param_grads.emplace_back(p->shape());
    }

    // Parameter slots are consumed from the back.
    std::size_t slot = param_grads.size();
    auto accumulate = [&](const Tensor& gw, const Tensor& gb) {
        slot -= 2;
        for (std::size_t i = 0; i < gw.size(); ++i) param_grads[slot][i] += gw[i];
        for (std::size_t i = 0; i < gb.size(); ++i) param_grads[slot + 1][i] += gb[i];
    };

    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Tensor& x = trace[i];
        g = std::visit(overloaded{
                           [&](const ConvLayer& l) {
                               auto r = l.transposed ? deconv_backward(l, x, g) : conv_backward(l, x, g);
                               accumulate(r.grad_w, r.grad_b);
                               return std::move(r.grad_x);
                           },
                           [&](const DenseLayer& l) {
                               auto r = dense_backward(l, x, g);
                               accumulate(r.grad_w, r.grad_b);
                               return std::move(r.grad_x);
                           },
                           [&](const ActivationLayer& l) { return activation_backward(l.kind, x, g); },
                           [&](const ReshapeLayer&) { return g.reshaped(x.shape()); },
                       },
                       layers_[i]);
    }
    return g;
}

std::vector<Tensor*> Network::parameters()
{
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        if (auto* c = std::get_if<ConvLayer>(&layer)) {
            out.push_back(&c->weights);
            out.push_back(&c->bias);
        } else if (auto* d = std::get_if<DenseLayer>(&layer)) {
            out.push_back(&d->weights);
            out.push_back(&d->bias);
        }
    }
    return out;
}

std::vector<const Tensor*> Network::parameters() const
{
    std::vector<const Tensor*> out;
    for (auto* p : const_cast<Network*>(this)->parameters()) out.push_back(p);
    return out;
}

std::size_t Network::parameter_count() const
{
    std::size_t n = 0;
    for (const Tensor* p : parameters()) n += p->size();
    return n;
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

enum class LayerTag : std::uint32_t { conv = 0, deconv = 1, dense = 2, activation = 3, reshape = 4 };

void write_shape(io::Writer& w, const Shape& s)
{
    w.u32(static_cast<std::uint32_t>(s.size()));
    for (auto d : s) w.u32(static_cast<std::uint32_t>(d));
}

Shape read_shape(io::Reader& r)
{
    const auto rank = r.u32("shape rank");
    if (rank == 0 || rank > 8) throw FormatError(r.source() + ": implausible tensor rank");
    Shape s(rank);
    for (auto& d : s) {
        d = r.u32("shape extent");
        if (d == 0) throw FormatError(r.source() + ": zero tensor extent");
    }
    return s;
}

} // namespace

void save_checkpoint(std::ostream& os, const std::vector<const Network*>& networks, const std::string& manifest)
{
    io::Writer w(os);
    w.magic("ROMW");
    w.u32(kCheckpointVersion);
    w.str(manifest);
    w.u32(static_cast<std::uint32_t>(networks.size()));
    for (const Network* net : networks) {
        w.u32(static_cast<std::uint32_t>(net->layers().size()));
        for (const auto& layer : net->layers()) {
            std::visit(overloaded{
                           [&](const ConvLayer& l) {
                               w.u32(static_cast<std::uint32_t>(l.transposed ? LayerTag::deconv : LayerTag::conv));
                               write_shape(w, l.weights.shape());
                               w.u32(static_cast<std::uint32_t>(l.stride));
                               w.u32(static_cast<std::uint32_t>(l.padding));
                               for (auto op : l.output_padding) w.u32(static_cast<std::uint32_t>(op));
                           },
                           [&](const DenseLayer& l) {
                               w.u32(static_cast<std::uint32_t>(LayerTag::dense));
                               w.u32(static_cast<std::uint32_t>(l.out_features()));
                               w.u32(static_cast<std::uint32_t>(l.in_features()));
                           },
                           [&](const ActivationLayer& l) {
                               w.u32(static_cast<std::uint32_t>(LayerTag::activation));
                               w.u32(static_cast<std::uint32_t>(l.kind));
                           },
                           [&](const ReshapeLayer& l) {
                               w.u32(static_cast<std::uint32_t>(LayerTag::reshape));
                               write_shape(w, l.sample_shape);
                           },
                       },
                       layer);
        }
    }
    for (const Network* net : networks) {
        for (const Tensor* p : net->parameters()) w.f64s(p->values());
    }
    w.check("checkpoint");
}

Checkpoint load_checkpoint(std::istream& is, const std::string& source)
{
    io::Reader r(is, source);
    r.expect_magic("ROMW");
    const auto version = r.u32("version");
    if (version != kCheckpointVersion) {
        throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.manifest = r.str("manifest");
    const auto n_nets = r.u32("network count");
    if (n_nets > 64) throw FormatError(source + ": implausible network count");
    ck.networks.resize(n_nets);
    for (auto& net : ck.networks) {
        const auto n_layers = r.u32("layer count");
        if (n_layers > 4096) throw FormatError(source + ": implausible layer count");
        for (std::uint32_t i = 0; i < n_layers; ++i) {
            const auto tag = static_cast<LayerTag>(r.u32("layer type"));
            switch (tag) {
            case LayerTag::conv:
            case LayerTag::deconv: {
                ConvLayer l;
                l.transposed = tag == LayerTag::deconv;
                const auto ws = read_shape(r);
                if (ws.size() != 4 && ws.size() != 5) throw FormatError(source + ": bad convolution weight rank");
                l.weights = Tensor(ws);
                l.bias = Tensor({l.transposed ? ws[1] : ws[0]});
                l.stride = r.u32("stride");
                l.padding = r.u32("padding");
                for (auto& op : l.output_padding) op = r.u32("output padding");
                net.add(std::move(l));
                break;
            }
            case LayerTag::dense: {
                const std::size_t fo = r.u32("dense out");
                const std::size_t fi = r.u32("dense in");
                if (fo == 0 || fi == 0) throw FormatError(source + ": empty dense layer");
                net.add(DenseLayer{Tensor({fo, fi}), Tensor({fo})});
                break;
            }
            case LayerTag::activation: {
                const auto kind = r.u32("activation");
                if (kind > static_cast<std::uint32_t>(Activation::linear)) {
                    throw FormatError(source + ": unknown activation tag");
                }
                net.add(ActivationLayer{static_cast<Activation>(kind)});
                break;
            }
            case LayerTag::reshape:
                net.add(ReshapeLayer{read_shape(r)});
                break;
            default:
                throw FormatError(source + ": unknown layer type");
            }
        }
    }
    for (auto& net : ck.networks) {
        for (Tensor* p : net.parameters()) r.f64s(p->values(), "parameters");
    }
    r.expect_end();
    return ck;
}

} // namespace rom::nn
