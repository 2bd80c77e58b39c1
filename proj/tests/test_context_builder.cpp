#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "alertlab/context_builder.hpp"
#include "oracles.hpp"

using namespace alertlab;

namespace {

Sequence seq(std::vector<EventIndex> ctx, EventIndex target) {
    Sequence s;
    s.context = std::move(ctx);
    s.target = target;
    return s;
}

std::vector<Sequence> one_pattern(std::size_t copies) {
    return std::vector<Sequence>(copies, seq({0, 1, 2}, 3));
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto c = oracle::random_gradient_case(s);
        const auto r = oracle::check_gradient(c);
        INFO("seed " << s << ", " << r.parameters << " parameters");
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("batch loss is the weighted mean of the per-example smoothed loss") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto c = oracle::random_gradient_case(100 + s);
        double num = 0.0, den = 0.0;
        for (const auto& ex : c.batch) {
            const auto [p, a] = predict(c.model, seq(ex.context, ex.target));
            num += ex.weight * label_smoothed_loss<double>(p.distribution, ex.target, c.delta);
            den += ex.weight;
        }
        CHECK(loss_and_gradient<double>(c.model, c.batch, c.delta, nullptr) == doctest::Approx(num / den).epsilon(1e-12));
    }
}

TEST_CASE("label-smoothed loss closed forms") {
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
    CHECK(label_smoothed_loss<double>(uniform, 2, 0.0) == doctest::Approx(std::log(4.0)));
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(4);
    onehot(1) = 1.0;
    CHECK(label_smoothed_loss<double>(onehot, 1, 0.0) == doctest::Approx(0.0));
    const Eigen::VectorXd p = (Eigen::VectorXd(4) << 0.1, 0.2, 0.3, 0.4).finished();
    const double l0 = label_smoothed_loss<double>(p, 0, 1.0);
    for (EventIndex t = 1; t < 4; ++t) CHECK(label_smoothed_loss<double>(p, t, 1.0) == doctest::Approx(l0));
}

TEST_CASE("attention is a distribution over the real positions") {
    const auto m = ModelParams::random(5, 6, 3);
    const auto [p, a] = predict(m, seq({kPad, 1, 4, 1}, 0));
    CHECK(a.weights.sum() == doctest::Approx(1.0));
    CHECK(a.weights(0) == 0.0);
    CHECK(p.distribution.sum() == doctest::Approx(1.0));
    CHECK(p.confidence == p.distribution.maxCoeff());

    const auto [pp, pad] = predict(m, seq({kPad, kPad, kPad}, 0));
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(pad.weights(i) == doctest::Approx(1.0 / 3.0));
    CHECK(pp.distribution.sum() == doctest::Approx(1.0));
}

TEST_CASE("unseen events are rejected by the model") {
    const auto m = ModelParams::random(3, 4, 1);
    CHECK_THROWS_AS(predict(m, seq({0, kUnseen}, 1)), UnseenEvent);
}

TEST_CASE("total attention aggregates by event type") {
    const auto s = seq({0, 1, 0}, 2);
    const AttentionVector a{(Eigen::VectorXd(3) << 0.5, 0.3, 0.2).finished()};
    const auto t = total_attention(s, a, 3);
    CHECK(t.values(0) == doctest::Approx(0.7));
    CHECK(t.values(1) == doctest::Approx(0.3));
    CHECK(t.values(2) == 0.0);

    const auto pads = total_attention(seq({kPad, kPad}, 0), AttentionVector{Eigen::VectorXd::Constant(2, 0.5)}, 3);
    CHECK(pads.values.isZero());

    const auto single = total_attention(seq({kPad, kPad, 2}, 0),
                                        AttentionVector{(Eigen::VectorXd(3) << 0.3, 0.3, 0.4).finished()}, 3);
    CHECK(single.values(2) == doctest::Approx(1.0));
    CHECK(single.values.sum() == doctest::Approx(1.0));

    CHECK_THROWS_AS(total_attention(s, AttentionVector{Eigen::VectorXd::Ones(2)}, 3), ValidationError);
}

TEST_CASE("a single repeated pattern is memorized") {
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 8;
    tc.optimizer = Optimizer::Adam;
    tc.learning_rate = 0.05;
    Hyperparameters hp;
    hp.n = 3;
    hp.hidden_nodes = 8;
    const auto m = train(one_pattern(8), 5, tc, hp);
    const auto [p, a] = predict(m, seq({0, 1, 2}, 3));
    CHECK(p.predicted == 3);
    CHECK(p.distribution(3) > 0.9);
}

TEST_CASE("plain SGD lowers the training loss") {
    TrainConfig tc;
    tc.epochs = 60;
    tc.batch_size = 4;
    tc.learning_rate = 0.5;
    Hyperparameters hp;
    hp.n = 3;
    hp.hidden_nodes = 8;
    TrainReport report;
    train(one_pattern(8), 5, tc, hp, &report);
    REQUIRE(report.epoch_loss.size() == 60);
    CHECK(report.epoch_loss.back() < 0.5 * report.epoch_loss.front());
}

TEST_CASE("full label smoothing drives predictions to uniform") {
    TrainConfig tc;
    tc.delta = 1.0;
    tc.epochs = 200;
    tc.batch_size = 8;
    tc.optimizer = Optimizer::Adam;
    tc.learning_rate = 0.05;
    Hyperparameters hp;
    hp.n = 3;
    hp.hidden_nodes = 8;
    const auto m = train(one_pattern(8), 5, tc, hp);
    const auto [p, a] = predict(m, seq({0, 1, 2}, 3));
    CHECK(p.confidence == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("training is deterministic for a seed") {
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 3;
    Hyperparameters hp;
    hp.n = 3;
    hp.hidden_nodes = 4;
    std::vector<Sequence> data{seq({0, 1, 2}, 3), seq({kPad, 0, 1}, 2), seq({1, 1, 1}, 0), seq({2, 3, 0}, 1)};
    CHECK(train(data, 4, tc, hp) == train(data, 4, tc, hp));
    auto other = tc;
    other.seed = 2;
    CHECK_FALSE(train(data, 4, other, hp) == train(data, 4, tc, hp));
}

TEST_CASE("duplicates collapse into weighted examples") {
    std::vector<Sequence> data{seq({0, 1}, 2), seq({1, 1}, 0), seq({0, 1}, 2), seq({0, 1}, 1), seq({0, 1}, 2)};
    const auto ex = collapse_duplicates(data);
    REQUIRE(ex.size() == 3);
    CHECK(ex[0].weight == 3.0);
    CHECK(ex[1].weight == 1.0);
    CHECK(ex[2].target == 1);
}

TEST_CASE("invalid training input is rejected") {
    TrainConfig tc;
    Hyperparameters hp;
    hp.n = 2;
    CHECK_THROWS_AS(train({}, 3, tc, hp), ValidationError);
    CHECK_THROWS_AS(train({seq({0, kUnseen}, 1)}, 3, tc, hp), ValidationError);
    CHECK_THROWS_AS(train({seq({0, 1, 2}, 1)}, 3, tc, hp), ValidationError);
    tc.batch_size = 0;
    CHECK_THROWS(train({seq({0, 1}, 1)}, 3, tc, hp));
}

TEST_CASE("divergent training is reported") {
    TrainConfig tc;
    tc.epochs = 3;
    tc.learning_rate = 1e300;
    Hyperparameters hp;
    hp.n = 3;
    hp.hidden_nodes = 4;
    CHECK_THROWS_AS(train(one_pattern(4), 5, tc, hp), TrainingDiverged);
}

TEST_CASE("checkpoint round trip") {
    const auto m = ModelParams::random(4, 3, 11);
    AlertDataset d;
    for (const char* r : {"a", "b", "c", "d"}) d.alerts.push_back({0, r, "h", Label::NonIncident, std::nullopt});
    const auto v = build_vocabulary(d);
    const auto path = std::filesystem::temp_directory_path() / "alertlab_checkpoint_test.json";
    save_checkpoint(path, m, v);
    const auto [back, vb] = load_checkpoint(path);
    CHECK(back == m);
    CHECK(vb.names() == v.names());
    std::filesystem::remove(path);
}
