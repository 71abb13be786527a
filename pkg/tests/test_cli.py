from pathlib import Path

import pytest

from crosstag.candidates import filter_candidates, generate_ngram_candidates
from crosstag.cli import main
from crosstag.core import LabeledSentence, TagScheme, tags_to_spans
from crosstag.formats import read_conll
from crosstag.scoring import CharOverlapScorer
from crosstag.selection import select_candidates

FIXTURES = Path(__file__).parent / "fixtures"


def fx(name):
    return str(FIXTURES / name)


class TestProjectCommand:
    def run(self, tmp_path, extra=()):
        out = tmp_path / "projected.conll"
        report = tmp_path / "report.csv"
        code = main([
            "project",
            "--source", fx("project_source.conll"),
            "--target", fx("project_target.txt"),
            "--alignments", fx("project_align.txt"),
            "--output", str(out),
            "--report", str(report),
            *extra,
        ])
        return code, out, report

    def test_identity_sentence_copies_labels(self, tmp_path):
        code, out, _ = self.run(tmp_path)
        assert code == 0
        sentences = read_conll(out)
        assert sentences[0] == (
            ["Obama", "fue", "a", "Nueva", "York"],
            ["B-PER", "O", "O", "B-LOC", "I-LOC"])

    def test_gap_merge_figure(self, tmp_path):
        _, out, _ = self.run(tmp_path)
        words, tags = read_conll(out)[1]
        assert tags == ["B-ORG", "I-ORG", "I-ORG", "I-ORG", "I-ORG"]

    def test_collision_merge_figure(self, tmp_path):
        _, out, report = self.run(tmp_path)
        words, tags = read_conll(out)[2]
        assert tags == ["O", "O", "B-PER", "I-PER"]
        lines = report.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("sentence,")
        # sentence 2 row: one gap merge on sentence 1, one collision merge here
        assert lines[2].split(",")[2] == "1"  # merged_gaps of the figure sentence
        assert lines[3].split(",")[4] == "1"  # collisions_merged

    def test_mismatched_line_counts_exit_one(self, tmp_path, capsys):
        short = tmp_path / "short.txt"
        short.write_text("Obama fue a Nueva York\n", encoding="utf-8")
        code = main([
            "project",
            "--source", fx("project_source.conll"),
            "--target", str(short),
            "--alignments", fx("project_align.txt"),
            "--output", str(tmp_path / "o.conll"),
        ])
        assert code == 1
        assert "index 1" in capsys.readouterr().err

    def test_direction_test_backprojects(self, tmp_path):
        code, out, _ = self.run(tmp_path, extra=["--direction", "test"])
        assert code == 0
        assert read_conll(out)[0][1] == ["B-PER", "O", "O", "B-LOC", "I-LOC"]


class TestTProjectCommand:
    def base_args(self, tmp_path, *extra):
        return [
            "tproject",
            "--source", fx("tproject_source.conll"),
            "--target", fx("tproject_target.txt"),
            "--output", str(tmp_path / "selected.conll"),
            *extra,
        ]

    def test_ngram_matches_library_path(self, tmp_path):
        code = main(self.base_args(tmp_path, "--ngram", "--scorer", "char-overlap"))
        assert code == 0
        got = read_conll(tmp_path / "selected.conll")

        scheme = TagScheme.IOB2
        scorer = CharOverlapScorer()
        expected = []
        for (words, tags), target in zip(
            read_conll(fx("tproject_source.conll")),
            [line.split() for line in
             Path(fx("tproject_target.txt")).read_text().splitlines()],
        ):
            source = LabeledSentence(words, tags_to_spans(tags, scheme))
            pool = filter_candidates(
                generate_ngram_candidates(target, source.spans), target)
            expected.append(select_candidates(pool, source, scorer))
        for (got_words, got_tags), sent in zip(got, expected):
            assert got_words == list(sent.words)
            assert tags_to_spans(got_tags, scheme) == sent.spans

    def test_external_candidates_select(self, tmp_path):
        code = main(self.base_args(
            tmp_path, "--candidates", fx("tproject_candidates.tsv"),
            "--scorer", "char-overlap"))
        assert code == 0
        sentences = read_conll(tmp_path / "selected.conll")
        assert sentences[0][1] == ["B-Person", "O", "O", "B-Location", "I-Location"]
        assert sentences[1][1] == ["O", "B-Target", "O", "O"]

    def test_most_probable_takes_rank_order(self, tmp_path):
        code = main(self.base_args(
            tmp_path, "--candidates", fx("tproject_candidates.tsv"),
            "--most-probable"))
        assert code == 0
        sentences = read_conll(tmp_path / "selected.conll")
        # Target's rank-0 candidate is "Sirve" at position 0
        assert sentences[1][1] == ["B-Target", "O", "O", "O"]
        # Location's rank-0 "New York" was filtered; rank-1 survives
        assert sentences[0][1][3:] == ["B-Location", "I-Location"]

    def test_oracle_reaches_gold(self, tmp_path):
        code = main(self.base_args(
            tmp_path, "--candidates", fx("tproject_candidates.tsv"),
            "--oracle", fx("tproject_gold.conll")))
        assert code == 0
        eval_code = main([
            "eval", "--gold", fx("tproject_gold.conll"),
            "--pred", str(tmp_path / "selected.conll")])
        assert eval_code == 0

    def test_oracle_output_equals_gold_f1_one(self, tmp_path, capsys):
        main(self.base_args(
            tmp_path, "--candidates", fx("tproject_candidates.tsv"),
            "--oracle", fx("tproject_gold.conll")))
        main([
            "eval", "--gold", fx("tproject_gold.conll"),
            "--pred", str(tmp_path / "selected.conll")])
        assert "1.0000" in capsys.readouterr().out

    def test_sweep_monotone(self, tmp_path):
        sweep = tmp_path / "sweep.csv"
        code = main(self.base_args(
            tmp_path, "--candidates", fx("tproject_candidates.tsv"),
            "--oracle", fx("tproject_gold.conll"),
            "--sweep", "0,1,2,5", "--sweep-output", str(sweep)))
        assert code == 0
        rows = sweep.read_text(encoding="utf-8").splitlines()[1:]
        rates = [float(r.split(",")[1]) for r in rows]
        assert rates == sorted(rates)
        assert rates[0] == 0.0
        # the Target span's gold candidate sits at rank 1, so k=1 misses it
        assert rates[1] == pytest.approx(0.75)
        assert rates[-1] == pytest.approx(1.0)

    def test_score_cache_written_and_reused(self, tmp_path):
        cache = tmp_path / "cache.tsv"
        args = self.base_args(
            tmp_path, "--ngram", "--scorer", "char-overlap",
            "--score-cache", str(cache))
        assert main(args) == 0
        first = cache.read_bytes()
        assert first
        assert main(args) == 0
        assert cache.read_bytes() == first

    def test_missing_candidate_source_is_input_error(self, tmp_path, capsys):
        assert main(self.base_args(tmp_path)) == 1
        assert "candidates" in capsys.readouterr().err.lower()


class TestDecodeCommand:
    def test_mock_table_golden_trace(self, tmp_path):
        out = tmp_path / "decoded.tagged"
        conll = tmp_path / "decoded.conll"
        code = main([
            "decode",
            "--input", fx("decode_sentences.txt"),
            "--categories", "Person",
            "--model", "mock-table:" + fx("decode_table.json"),
            "--output", str(out),
            "--conll", str(conll),
        ])
        assert code == 0
        assert out.read_text(encoding="utf-8") == (
            "<Person> Obama </Person> went\n"
            "<Person> went Obama </Person>\n"
            "<Person> California dreams </Person>\n")
        assert read_conll(conll)[0] == (["Obama", "went"], ["B-Person", "O"])

    def test_beam_one_equals_default(self, tmp_path):
        outputs = []
        for extra in ([], ["--beam", "1"]):
            out = tmp_path / f"out{len(outputs)}.tagged"
            main([
                "decode", "--input", fx("decode_sentences.txt"),
                "--categories", "Person", "--model", "random:7",
                "--output", str(out), *extra,
            ])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_constrained_pipe_to_diagnose_is_clean(self, tmp_path, capsys):
        out = tmp_path / "decoded.tagged"
        main([
            "decode", "--input", fx("decode_sentences.txt"),
            "--categories", "Person", "--model", "random:3",
            "--tokenizer", "chunk:2", "--beam", "2",
            "--output", str(out),
        ])
        code = main([
            "diagnose", "--input", fx("decode_sentences.txt"),
            "--output", str(out),
        ])
        assert code == 0
        assert "any=0.00%" in capsys.readouterr().out

    def test_unconstrained_adversarial_model_hallucinate(self, tmp_path, capsys):
        out = tmp_path / "decoded.tagged"
        main([
            "decode", "--input", fx("decode_sentences.txt"),
            "--categories", "Person",
            "--model", "mock-table:" + fx("decode_adversarial.json"),
            "--unconstrained",
            "--output", str(out),
        ])
        main([
            "diagnose", "--input", fx("decode_sentences.txt"),
            "--output", str(out),
        ])
        summary = capsys.readouterr().out
        assert "any=0.00%" not in summary

    def test_empty_sentence_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("a b\n\n", encoding="utf-8")
        code = main([
            "decode", "--input", str(bad), "--categories", "X",
            "--model", "random:0", "--output", str(tmp_path / "o.tagged"),
        ])
        assert code == 1
        assert ":2" in capsys.readouterr().err


class TestDiagnoseCommand:
    def test_figure_fixture_rates_and_csv(self, tmp_path, capsys):
        csv_path = tmp_path / "diag.csv"
        code = main([
            "diagnose", "--input", fx("diagnose_inputs.txt"),
            "--output", fx("diagnose_outputs.txt"),
            "--csv", str(csv_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "hallucination=33.33%" in out
        assert "splitting=33.33%" in out
        assert "markup=0.00%" in out
        assert "any=66.67%" in out
        lines = csv_path.read_text(encoding="utf-8").splitlines()
        assert lines[1].split(",")[2] == "California"
        assert lines[2].split(",")[3] == "1"
        assert lines[-1].startswith("rates_pct")


class TestEvalCommand:
    def test_identical_files_print_one(self, capsys):
        code = main([
            "eval", "--gold", fx("project_source.conll"),
            "--pred", fx("project_source.conll")])
        assert code == 0
        out = capsys.readouterr().out
        assert "micro" in out
        assert "1.0000" in out


class TestConvertCommand:
    def test_conll_tagged_conll_round_trip_is_byte_stable(self, tmp_path):
        tagged = tmp_path / "mid.tagged"
        back = tmp_path / "back.conll"
        assert main([
            "convert", "--input", fx("project_source.conll"),
            "--output", str(tagged), "--output-format", "tagged"]) == 0
        assert main([
            "convert", "--input", str(tagged), "--input-format", "tagged",
            "--output", str(back)]) == 0
        assert back.read_bytes() == Path(fx("project_source.conll")).read_bytes()

    def test_scheme_conversion(self, tmp_path):
        out = tmp_path / "bilou.conll"
        main([
            "convert", "--input", fx("project_source.conll"),
            "--output", str(out), "--scheme-out", "bilou"])
        words, tags = read_conll(out)[0]
        assert tags == ["U-PER", "O", "O", "B-LOC", "L-LOC"]

    def test_rename_mapping(self, tmp_path):
        out = tmp_path / "renamed.conll"
        main([
            "convert", "--input", fx("project_source.conll"),
            "--output", str(out), "--rename", "PER=Person,LOC=Location"])
        words, tags = read_conll(out)[0]
        assert tags == ["B-Person", "O", "O", "B-Location", "I-Location"]

    def test_bad_rename_is_input_error(self, tmp_path, capsys):
        code = main([
            "convert", "--input", fx("project_source.conll"),
            "--output", str(tmp_path / "o.conll"), "--rename", "PER"])
        assert code == 1
