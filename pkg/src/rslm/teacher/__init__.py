from .tokenizer import tokenize
from .model import TeacherModel, encode_image, encode_text
from .loss import info_nce
from .train import train_teacher, in_batch_accuracy

__all__ = [
    "tokenize",
    "TeacherModel",
    "encode_image",
    "encode_text",
    "info_nce",
    "train_teacher",
    "in_batch_accuracy",
]
