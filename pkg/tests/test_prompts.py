from pathlib import Path

import pytest

from fairtune.data import (
    PromptInstruction,
    assemble_instruction,
    celeba_instruction,
    plain_prompt,
    utkface_instruction,
)
from fairtune.errors import TemplateError


GOLDEN = Path(__file__).parent / "golden"


def test_celeba_instruction_matches_golden():
    text = assemble_instruction(celeba_instruction(50, "smiling", "male"), "celeba")
    assert text.encode("utf-8") == (GOLDEN / "celeba_smiling_male.txt").read_bytes()
    assert text.startswith(
        "Generate 50 diverse text prompts for human face attributes "
        "that always include smiling and male."
    )


def test_utkface_instruction_matches_golden():
    text = assemble_instruction(utkface_instruction(50, "female", "white"), "utkface")
    assert text.encode("utf-8") == (GOLDEN / "utkface_female_white.txt").read_bytes()
    assert "age start from 1 and end at 100" in text


def test_instruction_is_pure():
    instr = celeba_instruction(10, "smiling", "male")
    assert assemble_instruction(instr) == assemble_instruction(instr)


def test_instruction_rejects_empty_fields():
    with pytest.raises(TemplateError):
        assemble_instruction(celeba_instruction(10, "", "male"))
    with pytest.raises(TemplateError):
        assemble_instruction(celeba_instruction(0, "smiling", "male"))
    empty = PromptInstruction(
        task="human face attributes",
        number_of_prompts=5,
        target_attribute="smiling",
        protected_attribute="male",
        other_descriptions=(),
        prompt_format="Portrait face photo of a",
    )
    with pytest.raises(TemplateError):
        assemble_instruction(empty)


def test_unknown_template():
    with pytest.raises(TemplateError):
        assemble_instruction(celeba_instruction(10, "smiling", "male"), "imagenet")


def test_plain_prompt():
    assert plain_prompt("smiling", "male") == "Portrait face photo of a smiling male."
