from dataclasses import dataclass
from importlib import resources

from fairtune.errors import TemplateError


TEMPLATES = ("celeba", "utkface")

PORTRAIT_FORMAT = "Portrait face photo of a"

CELEBA_ATTRIBUTES = (
    "5 o’clock shadow", "arched eyebrows", "attractive", "bags under eyes",
    "bald", "bangs", "big lips", "big nose", "black hair", "blurry",
    "brown hair", "bushy eyebrows", "chubby", "double chin", "eyeglasses",
    "goatee", "grey hair", "heavy makeup", "high cheekbones",
    "mouth slightly open", "moustache", "narrow eyes", "no beard",
    "oval face", "pale skin", "pointy nose", "receding hairline",
    "rosy cheeks", "sideburns", "straight hair", "wavy hair",
    "wearing earrings", "wearing a hat", "wearing lipstick",
    "wearing necklace", "wearing necktie", "young",
)

UTKFACE_DETAILS = (
    "facial expressions",
    "hairstyles",
    "any other distinguishing features that can help in generating "
    "a realistic image",
)


@dataclass(frozen=True)
class PromptInstruction:
    task: str
    number_of_prompts: int
    target_attribute: str
    protected_attribute: str
    other_descriptions: tuple
    prompt_format: str

    def validate(self):
        for name in ("task", "target_attribute", "protected_attribute", "prompt_format"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise TemplateError(f"instruction field '{name}' is empty")
        if not isinstance(self.number_of_prompts, int) or self.number_of_prompts < 1:
            raise TemplateError(
                f"number_of_prompts must be a positive integer, "\
                f"got {self.number_of_prompts!r}"
            )
        if not self.other_descriptions or any(
            not str(item).strip() for item in self.other_descriptions
        ):
            raise TemplateError("instruction field 'other_descriptions' is empty")
        return self


def celeba_instruction(number_of_prompts, target_attribute, protected_attribute):
    return PromptInstruction(
        task="human face attributes",
        number_of_prompts=number_of_prompts,
        target_attribute=target_attribute,
        protected_attribute=protected_attribute,
        other_descriptions=CELEBA_ATTRIBUTES,
        prompt_format=PORTRAIT_FORMAT,
    )


def utkface_instruction(number_of_prompts, target_attribute, protected_attribute):
    return PromptInstruction(
        task="human face attributes",
        number_of_prompts=number_of_prompts,
        target_attribute=target_attribute,
        protected_attribute=protected_attribute,
        other_descriptions=UTKFACE_DETAILS,
        prompt_format=PORTRAIT_FORMAT,
    )


def load_template(name):
    if name not in TEMPLATES:
        raise TemplateError(f"unknown template '{name}', expected one of {TEMPLATES}")
    source = resources.files("fairtune.data").joinpath("templates", f"{name}.txt")
    return source.read_text(encoding="utf-8").rstrip("\n")


def join_descriptions(items):
    items = [str(item) for item in items]
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} and {items[1]}"
    return f"{', '.join(items[:-1])}, and {items[-1]}"


def assemble_instruction(instr, template="celeba"):
    """Render the LLM instruction for one template"""
    instr.validate()
    return load_template(template).format(
        number_of_prompts=instr.number_of_prompts,
        task=instr.task,
        target_attribute=instr.target_attribute,
        protected_attribute=instr.protected_attribute,
        other_descriptions=join_descriptions(instr.other_descriptions),
        prompt_format=instr.prompt_format,
    )


def plain_prompt(target_attribute, protected_attribute):
    """Non-contextual baseline prompt"""
    return f"{PORTRAIT_FORMAT} {target_attribute} {protected_attribute}."
