"""
Modality encoders producing the audio and text embeddings.
"""

from .audio_cnn import audio_encode, init_audio_params
from .text_lstm import init_text_params, lstm_step, text_encode

__all__ = ['audio_encode', 'init_audio_params', 'init_text_params', 'lstm_step', 'text_encode']
