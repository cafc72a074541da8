"""Rule-based spam detection, fixed-point behaviour and CSV round trips."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commstab.events import EMAIL, MICROPOST, MessageEvent
from commstab.graph import build_graph
from commstab.spam import (
    APPLICABLE_CRITERIA,
    REQUIRED_CRITERIA,
    SpamThresholds,
    ci_screen,
    classify,
    evaluate_criteria,
    is_spam_verdict,
    read_labels_csv,
    write_verdicts_csv,
)

from conftest import T0

DAY = 86400


def email(mid, ts, sender, recipients):
    return MessageEvent(message_id=mid, timestamp=ts, sender=sender,
                        recipients=tuple(recipients), channel=EMAIL)


def post(mid, ts, author, mentions=(), body=None, followers=None, following=None):
    return MessageEvent(message_id=mid, timestamp=ts, sender=author,
                        recipients=tuple(mentions), channel=MICROPOST,
                        body_text=body, author_followers=followers,
                        author_following=following)


def email_office_with_blaster():
    """Four chatty organic nodes plus one high-volume never-answered sender."""
    evs = []
    mid = 0
    organics = [f"o{i}" for i in range(4)]
    for i, a in enumerate(organics):
        for j, b in enumerate(organics):
            if a != b:
                evs.append(email(f"m{mid:03d}", T0 + mid * 60, a, [b]))
                mid += 1
    for k in range(40):
        evs.append(email(f"m{mid:03d}", T0 + mid * 60, "blast",
                         [organics[k % 4]]))
        mid += 1
    return evs


class TestThresholds:
    def test_defaults_valid(self):
        SpamThresholds().validate()

    @pytest.mark.parametrize("kw", [
        {"high_volume_percentile": 0.0},
        {"high_volume_percentile": 101.0},
        {"min_received_nonspam": -1},
        {"follow_ratio": 1.0},
        {"follow_ratio": 0.5},
        {"active_hour_bins": 0},
        {"active_hour_bins": 25},
        {"ci_screen": 1.5},
        {"max_fixed_point_iters": 0},
    ])
    def test_invalid_rejected(self, kw):
        with pytest.raises(ValueError):
            SpamThresholds(**kw).validate()

    def test_percentile_100_disables_volume_criterion(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        res = classify(evs, graph,
                       thresholds=SpamThresholds(high_volume_percentile=100.0))
        assert res.spammers == frozenset()
        assert res.volume_cutoff is None


class TestVotingRule:
    def test_email_two_of_three(self):
        assert is_spam_verdict({"A", "B"}, EMAIL)
        assert is_spam_verdict({"A", "B", "C"}, EMAIL)
        assert not is_spam_verdict({"A"}, EMAIL)

    def test_micropost_three_of_four(self):
        assert is_spam_verdict({"A", "B", "D"}, MICROPOST)
        assert not is_spam_verdict({"A", "B"}, MICROPOST)

    def test_email_ignores_d(self):
        assert not is_spam_verdict({"A", "D"}, EMAIL)
        assert is_spam_verdict({"A", "B", "D"}, EMAIL)

    @given(sat=st.sets(st.sampled_from("ABCD")),
           channel=st.sampled_from([EMAIL, MICROPOST]))
    @settings(max_examples=200, deadline=None)
    def test_biconditional(self, sat, channel):
        applicable = set(APPLICABLE_CRITERIA[channel])
        want = len(sat & applicable) >= REQUIRED_CRITERIA[channel]
        assert is_spam_verdict(sat, channel) == want


class TestEmailCriteria:
    def test_blaster_satisfies_a_and_b(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        crit = evaluate_criteria(evs, graph)
        assert crit["blast"] == frozenset({"A", "B"})

    def test_organic_with_ham_label_satisfies_nothing(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        crit = evaluate_criteria(evs, graph, labels={"o1": "ham"})
        assert crit["o1"] == frozenset()

    def test_spam_label_sets_c(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        crit = evaluate_criteria(evs, graph, labels={"o1": "spam"})
        assert crit["o1"] == frozenset({"C"})

    def test_classify_flags_unknown_label_nodes(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        flags = []
        classify(evs, graph, labels={"ghost1": "spam", "ghost2": "ham"},
                 flags=flags)
        assert flags == ["labels reference 2 unknown nodes"]

    def test_classify_blaster(self):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        res = classify(evs, graph)
        assert res.spammers == frozenset({"blast"})
        assert res.converged and res.iterations == 2
        assert res.volume_cutoff is not None
        by_node = {v.node: v for v in res.verdicts}
        assert by_node["blast"].iteration_fixed == 1
        assert not by_node["o0"].is_spammer


class TestMicropostCriteria:
    def _organic_posts(self, mid0=0):
        evs = []
        organics = [f"u{i}" for i in range(5)]
        mid = mid0
        for rep in range(2):
            for i, a in enumerate(organics):
                evs.append(post(f"p{mid:03d}", T0 + mid * 3600, a,
                                mentions=[organics[(i + 1 + rep) % 5]]))
                mid += 1
        return evs, mid

    def test_high_volume_unmentioned_bad_ratio(self):
        evs, mid = self._organic_posts()
        for k in range(40):
            evs.append(post(f"p{mid:03d}", T0 + k * 1800, "bot",
                            mentions=["u0"], followers=50, following=5000))
            mid += 1
        graph = build_graph(evs, MICROPOST)
        crit = evaluate_criteria(evs, graph)
        assert crit["bot"] == frozenset({"A", "B", "D"})
        res = classify(evs, graph)
        assert "bot" in res.spammers

    def test_two_criteria_not_enough(self):
        evs, mid = self._organic_posts()
        for k in range(40):
            evs.append(post(f"p{mid:03d}", T0 + k * 1800, "bot",
                            mentions=["u0"], followers=5000, following=100))
            mid += 1
        graph = build_graph(evs, MICROPOST)
        crit = evaluate_criteria(evs, graph)
        assert crit["bot"] == frozenset({"A", "B"})
        assert "bot" not in classify(evs, graph).spammers

    def test_hour_spread_satisfies_a_without_volume(self):
        evs, mid = self._organic_posts()
        for k in range(60):
            evs.append(post(f"p{mid:03d}", T0 + k * 900, "flood",
                            mentions=["u0"]))
            mid += 1
        for h in range(20):
            evs.append(post(f"q{h:03d}", T0 + h * 3600, "owl",
                            mentions=["u1"]))
        graph = build_graph(evs, MICROPOST)
        crit = evaluate_criteria(evs, graph)
        assert "A" in crit["owl"]

    def test_url_heavy_content_satisfies_c(self):
        evs, mid = self._organic_posts()
        for k in range(10):
            body = "deal http://promo.example/x" if k else "plain text"
            evs.append(post(f"p{mid:03d}", T0 + k * 3600, "linker",
                            mentions=["u0"], body=body))
            mid += 1
        graph = build_graph(evs, MICROPOST)
        crit = evaluate_criteria(evs, graph)
        assert "C" in crit["linker"]

    def test_latest_follower_counts_win(self):
        evs, mid = self._organic_posts()
        evs.append(post(f"p{mid:03d}", T0, "bot", mentions=["u0"],
                        followers=50, following=5000))
        evs.append(post(f"p{mid + 1:03d}", T0 + DAY, "bot", mentions=["u0"],
                        followers=5000, following=50))
        graph = build_graph(evs, MICROPOST)
        crit = evaluate_criteria(evs, graph)
        assert "D" not in crit["bot"]


class TestFixedPoint:
    def _chain(self, length, labelled):
        """x0 <- x1 <- ... each node receives two messages from the next."""
        evs = []
        mid = 0
        for i in range(length - 1):
            for k in range(2):
                evs.append(email(f"m{mid:03d}", T0 + mid * 60,
                                 f"x{i + 1}", [f"x{i}"]))
                mid += 1
        labels = {f"x{i}": "spam" for i in range(length) if i in labelled}
        return evs, labels

    def test_two_iteration_cascade(self):
        evs, labels = self._chain(3, labelled={1, 2})
        graph = build_graph(evs, EMAIL)
        thresholds = SpamThresholds(high_volume_percentile=100.0)
        crit0 = evaluate_criteria(evs, graph, labels=labels,
                                  thresholds=thresholds)
        assert "B" not in crit0["x1"]
        res = classify(evs, graph, labels=labels, thresholds=thresholds)
        by_node = {v.node: v for v in res.verdicts}
        assert by_node["x2"].iteration_fixed == 1
        assert by_node["x1"].iteration_fixed == 2
        assert by_node["x1"].satisfied == frozenset({"B", "C"})
        assert res.spammers == frozenset({"x1", "x2"})
        assert res.converged and res.iterations == 3

    def test_cap_hit_flags_nonconvergence(self):
        evs, labels = self._chain(6, labelled={0, 1, 2, 3, 4, 5})
        graph = build_graph(evs, EMAIL)
        thresholds = SpamThresholds(high_volume_percentile=100.0,
                                    max_fixed_point_iters=3)
        flags = []
        res = classify(evs, graph, labels=labels, thresholds=thresholds,
                       flags=flags)
        assert not res.converged
        assert flags == ["spam fixed point not reached after 3 sweeps"]

    def test_long_chain_converges_with_generous_cap(self):
        evs, labels = self._chain(6, labelled={0, 1, 2, 3, 4, 5})
        graph = build_graph(evs, EMAIL)
        thresholds = SpamThresholds(high_volume_percentile=100.0,
                                    max_fixed_point_iters=10)
        res = classify(evs, graph, labels=labels, thresholds=thresholds)
        assert res.converged
        assert res.spammers == frozenset(f"x{i}" for i in range(6))

    @given(moves=st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)),
                          min_size=1, max_size=25),
           spam_labels=st.sets(st.integers(0, 5)))
    @settings(max_examples=50, deadline=None)
    def test_matches_manual_fixed_point_and_grows_monotonically(
            self, moves, spam_labels):
        evs = [email(f"m{i:03d}", T0 + i * 60, f"x{s}", [f"x{t}"])
               for i, (s, t) in enumerate(moves)]
        graph = build_graph(evs, EMAIL)
        labels = {f"x{i}": "spam" for i in spam_labels}
        thresholds = SpamThresholds(max_fixed_point_iters=12)
        spam: frozenset = frozenset()
        for _ in range(10):
            crit = evaluate_criteria(evs, graph, spam_set=spam, labels=labels,
                                     thresholds=thresholds)
            new = frozenset(v for v, sat in crit.items()
                            if is_spam_verdict(sat, EMAIL))
            assert spam <= new
            if new == spam:
                break
            spam = new
        res = classify(evs, graph, labels=labels, thresholds=thresholds)
        assert res.converged
        assert res.spammers == spam
        for v in res.verdicts:
            assert v.is_spammer == is_spam_verdict(v.satisfied, EMAIL)


class TestCiScreen:
    def test_unbalanced_high_volume_listed(self):
        evs = []
        for i in range(9):
            evs.append(email(f"m{i:02d}", T0 + i, "blast", [f"o{i % 3}"]))
        evs.append(email("m90", T0 + 90, "o0", ["blast"]))
        for i, a in enumerate(["o0", "o1", "o2"]):
            evs.append(email(f"n{i:02d}", T0 + 200 + i, a, [f"o{(i + 1) % 3}"]))
        graph = build_graph(evs, EMAIL)
        assert ci_screen(evs, graph) == ["blast"]

    def test_balanced_high_volume_not_listed(self):
        evs = []
        for i in range(9):
            evs.append(email(f"m{i:02d}", T0 + i, "hub", [f"o{i % 3}"]))
            evs.append(email(f"r{i:02d}", T0 + 100 + i, f"o{i % 3}", ["hub"]))
        graph = build_graph(evs, EMAIL)
        assert ci_screen(evs, graph) == []

    def test_screen_is_sorted(self):
        evs = []
        mid = 0
        for sender in ("zz", "aa"):
            for i in range(9):
                evs.append(email(f"m{mid:03d}", T0 + mid, sender, ["o0"]))
                mid += 1
        evs.append(email("n00", T0 + 500, "o0", ["o1"]))
        graph = build_graph(evs, EMAIL)
        screened = ci_screen(evs, graph,
                             thresholds=SpamThresholds(high_volume_percentile=50.0))
        assert screened == sorted(screened) == ["aa", "zz"]


class TestCsvInterfaces:
    def test_verdicts_csv_layout(self, tmp_path):
        evs = email_office_with_blaster()
        graph = build_graph(evs, EMAIL)
        res = classify(evs, graph)
        out = tmp_path / "spam_verdicts.csv"
        write_verdicts_csv(res, str(out))
        lines = out.read_text().splitlines()
        assert lines[0] == "node_id,satisfied_criteria,is_spammer,iterations"
        rows = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
        assert rows["blast"][1] == "AB" and rows["blast"][2] == "true"
        assert rows["o0"][2] == "false"
        assert len(lines) == 1 + graph.n

    def test_labels_roundtrip(self, tmp_path):
        p = tmp_path / "labels.csv"
        p.write_text("node_id,label\nAlice <a@x.com>,spam\nb@x.com,HAM\n\n")
        labels = read_labels_csv(str(p))
        assert labels == {"a@x.com": "spam", "b@x.com": "ham"}

    def test_labels_bad_header(self, tmp_path):
        p = tmp_path / "labels.csv"
        p.write_text("id,verdict\nx,spam\n")
        with pytest.raises(ValueError, match="bad labels header"):
            read_labels_csv(str(p))

    def test_labels_bad_row(self, tmp_path):
        p = tmp_path / "labels.csv"
        p.write_text("node_id,label\nx,spam,extra\n")
        with pytest.raises(ValueError, match="bad labels row"):
            read_labels_csv(str(p))

    def test_labels_unknown_value(self, tmp_path):
        p = tmp_path / "labels.csv"
        p.write_text("node_id,label\nx,innocent\n")
        with pytest.raises(ValueError, match="unknown label"):
            read_labels_csv(str(p))
