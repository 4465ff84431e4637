#include "rsolve/checkpoint.hpp"

#include <stdexcept>

#include "rsolve/io.hpp"

namespace rsolve {

namespace {

Json f64_blob(const std::vector<double>& values)
{
    return Json{{"encoding", "base64-f64le"}, {"count", values.size()}, {"data", encode_f64_base64(values)}};
}

std::vector<double> read_blob(const Json& j)
{
    if (j.at("encoding").get<std::string>() != "base64-f64le")
        throw std::invalid_argument("checkpoint: unsupported array encoding");
    auto values = decode_f64_base64(j.at("data").get<std::string>());
    if (values.size() != j.at("count").get<std::size_t>())
        throw std::invalid_argument("checkpoint: array count does not match payload");
    return values;
}

}  // namespace

Json checkpoint_to_json(const Checkpoint& checkpoint)
{
    const ModelParams& p = checkpoint.params;
    Json j{
        {"format", "rsolve-checkpoint"},
        {"version", kCheckpointVersion},
        {"family", std::string(family_name(p.family))},
        {"architecture",
         {{"input_dim", p.architecture.input_dim},
          {"hidden", p.architecture.hidden},
          {"activation", std::string(activation_name(p.architecture.activation))}}},
        {"alpha_max", p.alpha_max},
        {"alpha_abs", p.alpha_abs},
        {"seed", p.seed},
        {"theta", f64_blob(p.theta)},
    };
    if (checkpoint.training) {
        const TrainingState& s = *checkpoint.training;
        Json slots = Json::array();
        for (const auto& slot : s.optimizer.slots) slots.push_back(f64_blob(slot));
        j["training"] = {
            {"step", s.step},
            {"loss_ma", s.loss_ma},
            {"initial_loss", s.initial_loss},
            {"initial_sampled_psi", s.initial_sampled_psi},
            {"optimizer_slots", slots},
        };
    }
    return j;
}

Checkpoint checkpoint_from_json(const Json& j)
{
    try {
        if (j.at("format").get<std::string>() != "rsolve-checkpoint")
            throw std::invalid_argument("checkpoint: not an rsolve checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw std::invalid_argument("checkpoint: unsupported version");
        Checkpoint checkpoint;
        ModelParams& p = checkpoint.params;
        p.family = parse_family(j.at("family").get<std::string>());
        const Json& arch = j.at("architecture");
        p.architecture.input_dim = arch.at("input_dim").get<int>();
        p.architecture.hidden = arch.at("hidden").get<std::vector<int>>();
        p.architecture.activation = parse_activation(arch.at("activation").get<std::string>());
        p.alpha_max = j.at("alpha_max").get<double>();
        p.alpha_abs = j.at("alpha_abs").get<double>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.theta = read_blob(j.at("theta"));
        p.validate();
        if (j.contains("training")) {
            const Json& t = j.at("training");
            TrainingState s;
            s.step = t.at("step").get<std::int64_t>();
            s.loss_ma = t.at("loss_ma").get<double>();
            s.initial_loss = t.at("initial_loss").get<double>();
            s.initial_sampled_psi = t.at("initial_sampled_psi").get<double>();
            for (const auto& slot : t.at("optimizer_slots")) s.optimizer.slots.push_back(read_blob(slot));
            checkpoint.training = std::move(s);
        }
        return checkpoint;
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint)
{
    write_text_file(path, checkpoint_to_json(checkpoint).dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    return checkpoint_from_json(Json::parse(read_text_file(path)));
}

}  // namespace rsolve
