"""Regenerate the canonical fixture files under src/rmoore/fixtures."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
from rmoore import specfmt  # noqa: E402
from rmoore.examples import STACK_RULES, _ripple_rules, network_rules  # noqa: E402

D = str(ROOT / "src" / "rmoore" / "fixtures") + "/"


def write(name, doc):
    text = specfmt.render(specfmt.parse(json.dumps(doc)))
    assert specfmt.render(specfmt.parse(text)) == text
    Path(D + name).write_text(text, encoding="utf-8")


stack_alpha = ["PUSH[a]", "PUSH[b]", "POP"]
write("stack.json", {
    "specfmt_version": 1,
    "alphabets": {"ops": stack_alpha, "cell": ["a", "b", "EMPTY"]},
    "machines": {
        "cell": {"builtin": "cell", "params": {"alphabet": ["a", "b", "EMPTY"]}},
        "stack3_model": {"builtin": "stack", "params": {"depth": 3}},
        "stack2_model": {"builtin": "stack", "params": {"depth": 2}},
    },
    "products": {
        "stack2": {"alphabet": "ops", "factors": ["cell"] * 2, "rules": list(STACK_RULES), "reference": "stack2_model"},
        "stack3": {"alphabet": "ops", "factors": ["cell"] * 3, "rules": list(STACK_RULES), "reference": "stack3_model"},
    },
    "run": [
        {"target": "stack3", "word": "PUSH[a] PUSH[b]"},
        {"target": "stack3", "word": "PUSH[a] PUSH[b] POP"},
        {"target": "stack2", "word": "PUSH[a] PUSH[b] PUSH[a]"},
    ],
})
corrupt = [dict(r) for r in STACK_RULES]
corrupt[3]["emit"] = ["out(i)"]
write("stack_corrupt.json", {
    "specfmt_version": 1,
    "machines": {
        "cell": {"builtin": "cell", "params": {"alphabet": ["a", "b", "EMPTY"]}},
        "stack3_model": {"builtin": "stack", "params": {"depth": 3}},
    },
    "products": {
        "stack3": {"alphabet": stack_alpha, "factors": ["cell"] * 3, "rules": corrupt, "reference": "stack3_model"},
    },
})
machines = {"t2": {"alphabet": ["tick"], "start": 0, "delta": [[1], [0]], "gamma": ["0", "1"]}}
for k in (4, 8):
    machines[f"t{k}"] = {"builtin": "counter", "params": {"n": k}}
write("ripple.json", {
    "specfmt_version": 1,
    "machines": machines,
    "products": {
        "ripple2": {"alphabet": ["tick"], "factors": ["t2"] * 2, "rules": _ripple_rules(2, "carry"),
                    "output": {"weighted_sum": 2}, "reference": "t4"},
        "ripple3": {"alphabet": ["tick"], "factors": ["t2"] * 3, "rules": _ripple_rules(3, "carry"),
                    "output": {"weighted_sum": 2}, "reference": "t8"},
        "ripple3_bits": {"alphabet": ["tick"], "factors": ["t2"] * 3, "rules": _ripple_rules(3, "carry")},
    },
    "run": [{"target": "ripple3", "word": "tick tick tick tick tick"}],
})
write("network.json", {
    "specfmt_version": 1,
    "machines": {
        "node_a": {"builtin": "node", "params": {"initial": ["m1"]}},
        "node_b": {"builtin": "node", "params": {"initial": ["m2"]}},
        "arbiter": {"builtin": "arbiter", "params": {"nodes": 3}},
        "network_model": {"builtin": "network"},
    },
    "products": {
        "network": {"alphabet": ["TICK"], "factors": ["node_a", "node_b", "node_a", "arbiter"],
                    "rules": network_rules(3), "reference": "network_model"},
    },
    "run": [{"target": "network", "word": "TICK TICK TICK"}],
})
write("counters.json", {
    "specfmt_version": 1,
    "machines": {
        "t2": {"alphabet": ["tick"], "start": 0, "delta": [[1], [0]], "gamma": ["0", "1"]},
        "t3": {"alphabet": ["tick"], "states": ["zero", "one", "two"], "start": 0,
               "delta": [[1], [2], [0]], "gamma": ["0", "1", "2"]},
        "t5": {"builtin": "counter", "params": {"n": 5}},
        "zero": {"builtin": "constant", "params": {"alphabet": ["tick"], "value": "0"}},
        "cell": {"builtin": "cell"},
        "length": {"builtin": "length"},
    },
    "products": {
        "t3_wrapped": {"alphabet": ["tick"], "factors": ["t3"],
                       "rules": [{"factor": 1, "input": "$x", "emit": ["$x"]}], "output": {"project": 1},
                       "reference": "t3"},
    },
    "run": [{"target": "t3", "word": "tick tick tick tick"}, {"target": "length", "word": "a b a"}],
})
